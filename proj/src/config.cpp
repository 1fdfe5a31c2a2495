#include "sglab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sglab {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_number(const std::string& tok, std::size_t line)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + tok + "'", line);
    }
    if (used != tok.size()) throw ConfigError("trailing characters in number '" + tok + "'", line);
    if (!std::isfinite(v)) throw ConfigError("non-finite number '" + tok + "'", line);
    return v;
}

std::uint64_t parse_unsigned(const std::string& tok, std::size_t line)
{
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("expected a non-negative integer, got '" + tok + "'", line);
    try {
        return std::stoull(tok);
    } catch (const std::exception&) {
        throw ConfigError("integer out of range '" + tok + "'", line);
    }
}

bool parse_bool(const std::string& tok, std::size_t line)
{
    if (tok == "true" || tok == "1" || tok == "yes") return true;
    if (tok == "false" || tok == "0" || tok == "no") return false;
    throw ConfigError("expected true/false, got '" + tok + "'", line);
}

// "<number> [unit]"; a unit, when given, must be the canonical SI one.
double parse_quantity(const IniDocument::Entry& e, const std::string& unit, bool natural)
{
    const auto toks = split_ws(e.value);
    if (toks.empty() || toks.size() > 2) throw ConfigError("expected '<number> [" + unit + "]'", e.line);
    if (toks.size() == 2) {
        if (natural) throw ConfigError("unit suffix not allowed with units = natural", e.line);
        if (toks[1] != unit) throw ConfigError("unit '" + toks[1] + "' should be '" + unit + "'", e.line);
    }
    return parse_number(toks[0], e.line);
}

std::vector<double> parse_list(const IniDocument::Entry& e)
{
    std::vector<double> out;
    std::string item;
    std::istringstream in(e.value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty list item", e.line);
        out.push_back(parse_number(item, e.line));
    }
    return out;
}

Axis parse_axis(const std::string& name, const IniDocument::Entry& e)
{
    const auto toks = split_ws(e.value);
    Axis a;
    a.name = name;
    if (toks.size() == 1) {
        a.start = a.stop = parse_number(toks[0], e.line);
        a.count = 1;
        return a;
    }
    if (toks.size() != 4) throw ConfigError("axis '" + name + "': expected 'lin|log START STOP COUNT'", e.line);
    if (toks[0] == "lin") a.scale = AxisScale::Linear;
    else if (toks[0] == "log") a.scale = AxisScale::Log;
    else throw ConfigError("axis '" + name + "': scale must be lin or log", e.line);
    a.start = parse_number(toks[1], e.line);
    a.stop = parse_number(toks[2], e.line);
    a.count = parse_unsigned(toks[3], e.line);
    if (a.count < 1) throw ConfigError("axis '" + name + "': count must be >= 1", e.line);
    if (a.scale == AxisScale::Log && !(a.start > 0 && a.stop > 0))
        throw ConfigError("axis '" + name + "': log range needs positive bounds", e.line);
    if (a.start < 0 || a.stop < 0) throw ConfigError("axis '" + name + "': values must be >= 0", e.line);
    return a;
}

void reject_unknown(const IniDocument& doc, const std::string& section, const std::vector<std::string>& allowed)
{
    for (const auto& k : doc.keys(section)) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ConfigError("unknown key '" + k + "' in [" + section + "]", doc.find(section, k)->line);
    }
}

}  // namespace

IniDocument IniDocument::parse(const std::string& text)
{
    IniDocument doc;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find_first_of("#;");
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) throw ConfigError("malformed section header", line);
            section = trim(s.substr(1, s.size() - 2));
            doc.data_[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
        if (section.empty()) throw ConfigError("key outside of any [section]", line);
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", line);
        if (value.empty()) throw ConfigError("empty value for '" + key + "'", line);
        auto& sec = doc.data_[section];
        if (sec.count(key)) throw ConfigError("duplicate key '" + key + "' in [" + section + "]", line);
        sec[key] = Entry{value, line};
    }
    return doc;
}

IniDocument IniDocument::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const IniDocument::Entry* IniDocument::find(const std::string& section, const std::string& key) const
{
    const auto s = data_.find(section);
    if (s == data_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

std::vector<std::string> IniDocument::keys(const std::string& section) const
{
    std::vector<std::string> out;
    const auto s = data_.find(section);
    if (s == data_.end()) return out;
    for (const auto& kv : s->second) out.push_back(kv.first);
    return out;
}

std::vector<std::string> IniDocument::sections() const
{
    std::vector<std::string> out;
    for (const auto& kv : data_) out.push_back(kv.first);
    return out;
}

double Axis::node(std::size_t i) const
{
    if (count == 1) return start;
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    if (scale == AxisScale::Log) return start * std::pow(stop / start, f);
    return start + (stop - start) * f;
}

const std::vector<std::string>& axis_order()
{
    static const std::vector<std::string> order{"b", "B0", "tau", "sigma0", "vy", "P", "K"};
    return order;
}

SGParams apply_groups(SGParams p, double P, double K)
{
    if (!(P >= 0) || !(K >= 0)) throw ConfigError("P and K must be >= 0");
    if ((P == 0.0) != (K == 0.0))
        throw ConfigError("P and K must both be zero or both positive (P = " + std::to_string(P) +
                          ", K = " + std::to_string(K) + ")");
    if (K == 0.0) {
        p.gradient_b = 0.0;
        return p;
    }
    const double vz = K * p.hbar / (p.mass * p.sigma0);
    p.tau = P * p.sigma0 / vz;
    p.gradient_b = p.mass * vz / (p.moment * p.tau);
    return p;
}

void SweepConfig::validate() const
{
    try {
        base.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[params] ") + e.what());
    }
    const auto has = [&](const std::string& n) {
        return std::any_of(axes.begin(), axes.end(), [&](const Axis& a) { return a.name == n; });
    };
    if (has("P") != has("K")) throw ConfigError("[sweep] axes P and K must be given together");
    if (has("P") && (has("tau") || has("b")))
        throw ConfigError("[sweep] P/K axes cannot be combined with tau or b axes");
    for (const Axis& a : axes) {
        if (a.name == "sigma0" && !(std::min(a.start, a.stop) > 0))
            throw ConfigError("[sweep] sigma0 range must be positive");
    }
    if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("[run] epsilon must lie in (0, 1)");
    if (threads < 1) throw ConfigError("[run] threads must be >= 1");
    for (double t : t1_seconds)
        if (t < 0) throw ConfigError("[times] t1 values must be >= 0");
    for (double t : t1_spread)
        if (t < 0) throw ConfigError("[times] t1_spread values must be >= 0");
    if (point_count() > cap)
        throw ConfigError("sweep has " + std::to_string(point_count()) + " points, above cap " + std::to_string(cap));
    if (solver.n < 16 || (solver.n & (solver.n - 1)) != 0) throw ConfigError("[solver] n must be a power of two >= 16");
    if (!(solver.dt_spread > 0)) throw ConfigError("[solver] dt_spread must be > 0");
    if (!(solver.P > 0) || !(solver.K > 0)) throw ConfigError("[solver] P and K must be > 0");
    for (double r : solver.r_values)
        if (!(r > 0)) throw ConfigError("[solver] r_values must be > 0");
}

std::size_t SweepConfig::point_count() const
{
    if (random_points > 0) return random_points;
    std::size_t n = 1;
    for (const Axis& a : axes) {
        if (a.count != 0 && n > cap / a.count + 1) return cap + 1;
        n *= a.count;
    }
    return n;
}

SweepConfig config_from(const IniDocument& doc)
{
    for (const auto& s : doc.sections()) {
        static const std::vector<std::string> known{"params", "sweep", "times", "run", "solver"};
        if (std::find(known.begin(), known.end(), s) == known.end()) throw ConfigError("unknown section [" + s + "]");
    }

    SweepConfig cfg;
    reject_unknown(doc, "params", {"units", "mass", "moment", "B0", "b", "tau", "sigma0", "vy", "hbar"});
    if (const auto* e = doc.find("params", "units")) {
        if (e->value == "natural") cfg.natural_units = true;
        else if (e->value != "si") throw ConfigError("units must be 'si' or 'natural'", e->line);
    }
    if (cfg.natural_units) {
        cfg.base.mass = cfg.base.moment = cfg.base.sigma0 = cfg.base.hbar = 1.0;
        cfg.base.tau = 1.0;
        cfg.base.vy = 1.0;
    }
    const bool nat = cfg.natural_units;
    const struct {
        const char* key;
        const char* unit;
        double SGParams::*field;
    } fields[] = {
        {"mass", "kg", &SGParams::mass},       {"moment", "J/T", &SGParams::moment},
        {"B0", "T", &SGParams::B0},            {"b", "T/m", &SGParams::gradient_b},
        {"tau", "s", &SGParams::tau},          {"sigma0", "m", &SGParams::sigma0},
        {"vy", "m/s", &SGParams::vy},          {"hbar", "J*s", &SGParams::hbar},
    };
    for (const auto& f : fields) {
        if (const auto* e = doc.find("params", f.key)) cfg.base.*(f.field) = parse_quantity(*e, f.unit, nat);
    }

    reject_unknown(doc, "sweep", {"b", "B0", "tau", "sigma0", "vy", "P", "K", "random_points", "cap"});
    for (const auto& name : axis_order()) {
        if (const auto* e = doc.find("sweep", name)) cfg.axes.push_back(parse_axis(name, *e));
    }
    if (const auto* e = doc.find("sweep", "random_points")) cfg.random_points = parse_unsigned(e->value, e->line);
    if (const auto* e = doc.find("sweep", "cap")) cfg.cap = parse_unsigned(e->value, e->line);

    reject_unknown(doc, "times", {"t1", "t1_spread"});
    if (const auto* e = doc.find("times", "t1")) cfg.t1_seconds = parse_list(*e);
    if (const auto* e = doc.find("times", "t1_spread")) cfg.t1_spread = parse_list(*e);
    if (cfg.t1_seconds.empty() && cfg.t1_spread.empty()) cfg.t1_seconds = {0.0};

    reject_unknown(doc, "run", {"epsilon", "seed", "threads", "out", "curves", "quadrature"});
    if (const auto* e = doc.find("run", "epsilon")) cfg.epsilon = parse_number(e->value, e->line);
    if (const auto* e = doc.find("run", "seed")) cfg.seed = parse_unsigned(e->value, e->line);
    if (const auto* e = doc.find("run", "threads")) cfg.threads = parse_unsigned(e->value, e->line);
    if (const auto* e = doc.find("run", "out")) cfg.out = e->value;
    if (const auto* e = doc.find("run", "curves")) cfg.curves = parse_unsigned(e->value, e->line);
    if (const auto* e = doc.find("run", "quadrature")) cfg.quadrature = parse_bool(e->value, e->line);

    reject_unknown(doc, "solver", {"n", "dt_spread", "P", "K", "r_values"});
    if (const auto* e = doc.find("solver", "n")) cfg.solver.n = parse_unsigned(e->value, e->line);
    if (const auto* e = doc.find("solver", "dt_spread")) cfg.solver.dt_spread = parse_number(e->value, e->line);
    if (const auto* e = doc.find("solver", "P")) cfg.solver.P = parse_number(e->value, e->line);
    if (const auto* e = doc.find("solver", "K")) cfg.solver.K = parse_number(e->value, e->line);
    if (const auto* e = doc.find("solver", "r_values")) cfg.solver.r_values = parse_list(*e);

    cfg.validate();
    return cfg;
}

SweepConfig load_config(const std::string& path) { return config_from(IniDocument::load(path)); }

}  // namespace sglab
