#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sglab/params.hpp"

namespace sglab {

/// Config parse/validation error; `line` is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Parsed "key = value" text with [section] headers. '#' and ';' start
/// comments. Keys are unique within a section.
class IniDocument {
public:
    static IniDocument parse(const std::string& text);
    static IniDocument load(const std::string& path);

    struct Entry {
        std::string value;
        std::size_t line = 0;
    };

    const Entry* find(const std::string& section, const std::string& key) const;
    std::vector<std::string> keys(const std::string& section) const;
    std::vector<std::string> sections() const;

private:
    std::map<std::string, std::map<std::string, Entry>> data_;
};

enum class AxisScale { Linear, Log };

/// Sweep range over one parameter: `count` nodes from start to stop.
struct Axis {
    std::string name;  // b, B0, tau, sigma0, vy, P, K
    AxisScale scale = AxisScale::Linear;
    double start = 0.0;
    double stop = 0.0;
    std::size_t count = 1;

    double node(std::size_t i) const;
};

struct SolverSettings {
    std::size_t n = 256;
    double dt_spread = 1e-3;
    double P = 2.0;
    double K = 1.0;
    std::vector<double> r_values{0.1, 0.03, 0.01};
};

struct SweepConfig {
    SGParams base;
    bool natural_units = false;
    std::vector<Axis> axes;            // canonical order, see axis_order()
    std::vector<double> t1_seconds;
    std::vector<double> t1_spread;     // multiples of each point's t_spread
    double epsilon = 1e-3;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::size_t random_points = 0;     // 0: Cartesian grid over the axes
    std::size_t cap = 1000000;
    std::size_t curves = 16;           // saturation curves emitted
    bool quadrature = false;           // fill inner_re/inner_im by quadrature
    std::string out = "out";
    SolverSettings solver;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
    std::size_t point_count() const;
};

/// Builds a config from a document; missing sections fall back to defaults.
SweepConfig config_from(const IniDocument& doc);
SweepConfig load_config(const std::string& path);

const std::vector<std::string>& axis_order();

/// Parameters realizing the given (P, K) with base mass, moment, sigma0,
/// hbar and B0 held fixed.
SGParams apply_groups(SGParams base, double P, double K);

}  // namespace sglab
