#include "couette/config.hpp"

#include "couette/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace couette {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double get_double(const ConfigMap& m, const std::string& key, double fallback) {
    auto it = m.find(key);
    if (it == m.end()) return fallback;
    const std::string& s = it->second;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        throw ValidationError(key + ": expected a finite number, got '" + s + "'");
    return v;
}

template <class Int>
Int get_int(const ConfigMap& m, const std::string& key, Int fallback) {
    auto it = m.find(key);
    if (it == m.end()) return fallback;
    const std::string& s = it->second;
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ValidationError(key + ": expected an integer, got '" + s + "'");
    return v;
}

bool get_bool(const ConfigMap& m, const std::string& key, bool fallback) {
    auto it = m.find(key);
    if (it == m.end()) return fallback;
    const std::string& s = it->second;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ValidationError(key + ": expected a boolean, got '" + s + "'");
}

void check_keys(const ConfigMap& m, ConfigTarget target) {
    const auto& allowed = allowed_keys(target);
    for (const auto& [k, v] : m)
        if (!allowed.count(k)) throw ValidationError("unknown key '" + k + "'");
}

void require(const ConfigMap& m, const std::string& key) {
    if (!m.count(key)) throw ValidationError(key + ": missing required key");
}

}  // namespace

ConfigMap parse_config(std::string_view text) {
    ConfigMap out;
    std::istringstream is{std::string(text)};
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ValidationError("line " + std::to_string(n) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ValidationError("line " + std::to_string(n) + ": empty key");
        if (value.empty()) throw ValidationError(key + ": empty value at line " + std::to_string(n));
        if (!out.emplace(key, value).second)
            throw ValidationError("duplicate key '" + key + "' at line " + std::to_string(n));
    }
    return out;
}

ConfigMap read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot read config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

const std::set<std::string>& allowed_keys(ConfigTarget target) {
    static const std::set<std::string> sim{"nu",  "gamma2", "epsilon", "s",         "K",      "c",
                                           "n_z", "n_y",    "L_y",     "dt",        "t_end",  "seed",
                                           "dealias", "nonlinear", "dt_out", "init", "kappa"};
    static const std::set<std::string> lin{"nu", "gamma2", "k", "eta", "t_end", "dt", "c", "f0", "theta0"};
    static const std::set<std::string> toy{"alpha", "beta", "epsilon", "nu", "t_end"};
    static const std::set<std::string> mult{"nu", "s", "c", "K", "gamma2"};
    switch (target) {
        case ConfigTarget::simulation: return sim;
        case ConfigTarget::linear: return lin;
        case ConfigTarget::toy: return toy;
        case ConfigTarget::multipliers: return mult;
    }
    return sim;
}

SimConfig load_sim_config(const ConfigMap& m) {
    check_keys(m, ConfigTarget::simulation);
    require(m, "nu");
    require(m, "gamma2");
    SimConfig c;
    const int nz = get_int<int>(m, "n_z", c.grid.n_z());
    const int ny = get_int<int>(m, "n_y", c.grid.n_y());
    const double Ly = get_double(m, "L_y", c.grid.L_y());
    if (nz < 4 || nz % 2) throw ValidationError("n_z: must be even and >= 4");
    if (ny < 4 || ny % 2) throw ValidationError("n_y: must be even and >= 4");
    if (!(Ly > 0.0)) throw ValidationError("L_y: must satisfy L_y > 0");
    c.grid = Grid(nz, ny, Ly);
    c.nu = get_double(m, "nu", c.nu);
    c.gamma2 = get_double(m, "gamma2", c.gamma2);
    c.epsilon = get_double(m, "epsilon", c.epsilon);
    c.s = get_double(m, "s", c.s);
    c.K = get_double(m, "K", c.K);
    c.c = get_double(m, "c", c.c);
    c.dt = get_double(m, "dt", c.dt);
    c.t_end = get_double(m, "t_end", c.t_end);
    c.dt_out = get_double(m, "dt_out", c.dt_out);
    c.kappa = get_double(m, "kappa", c.kappa);
    c.seed = get_int<std::uint64_t>(m, "seed", c.seed);
    c.dealias = get_bool(m, "dealias", c.dealias);
    c.nonlinear = get_bool(m, "nonlinear", c.nonlinear);
    if (auto it = m.find("init"); it != m.end()) {
        if (it->second == "random")
            c.init = InitKind::random;
        else if (it->second == "wave")
            c.init = InitKind::wave;
        else
            throw ValidationError("init: expected 'random' or 'wave', got '" + it->second + "'");
    }
    c.validate();
    return c;
}

LinearRequest load_linear_config(const ConfigMap& m) {
    check_keys(m, ConfigTarget::linear);
    require(m, "nu");
    require(m, "gamma2");
    LinearRequest r;
    r.params = LinearParams(get_double(m, "nu", 0.0), get_double(m, "gamma2", 1.0));
    r.k = get_int<int>(m, "k", r.k);
    r.eta = get_double(m, "eta", r.eta);
    r.t_end = get_double(m, "t_end", r.t_end);
    r.dt = get_double(m, "dt", r.dt);
    r.c = get_double(m, "c", r.c);
    r.f0 = get_double(m, "f0", r.f0);
    r.theta0 = get_double(m, "theta0", r.theta0);
    if (r.k == 0) throw ValidationError("k: must satisfy k != 0");
    if (!(r.dt > 0.0)) throw ValidationError("dt: must satisfy dt > 0");
    if (!(r.t_end > 0.0)) throw ValidationError("t_end: must satisfy t_end > 0");
    if (!(r.c > 0.0)) throw ValidationError("c: must satisfy c > 0");
    return r;
}

ToyConfig load_toy_config(const ConfigMap& m) {
    check_keys(m, ConfigTarget::toy);
    require(m, "alpha");
    require(m, "beta");
    ToyConfig c;
    c.alpha = get_double(m, "alpha", c.alpha);
    c.beta = get_double(m, "beta", c.beta);
    c.epsilon = get_double(m, "epsilon", c.epsilon);
    c.nu = get_double(m, "nu", c.nu);
    c.t_end = get_double(m, "t_end", c.t_end);
    c.validate();
    return c;
}

MultiplierParams load_multiplier_params(const ConfigMap& m) {
    check_keys(m, ConfigTarget::multipliers);
    require(m, "nu");
    require(m, "gamma2");
    MultiplierParams p;
    p.nu = get_double(m, "nu", p.nu);
    p.gamma2 = get_double(m, "gamma2", p.gamma2);
    p.s = get_double(m, "s", p.s);
    p.c = get_double(m, "c", p.c);
    if (!(p.gamma2 > 0.25)) throw ValidationError("gamma2: must satisfy γ² > 1/4");
    p.K = get_double(m, "K", MultiplierParams::default_K(p.gamma2));
    p.validate();
    return p;
}

AnyConfig load_config(const std::string& path, ConfigTarget target) {
    const ConfigMap m = read_config_file(path);
    switch (target) {
        case ConfigTarget::simulation: return load_sim_config(m);
        case ConfigTarget::linear: return load_linear_config(m);
        case ConfigTarget::toy: return load_toy_config(m);
        case ConfigTarget::multipliers: return load_multiplier_params(m);
    }
    throw ValidationError("unknown config target");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ConfigMap to_map(const SimConfig& c) {
    return {{"nu", format_double(c.nu)},
            {"gamma2", format_double(c.gamma2)},
            {"epsilon", format_double(c.epsilon)},
            {"s", format_double(c.s)},
            {"K", format_double(c.K)},
            {"c", format_double(c.c)},
            {"n_z", std::to_string(c.grid.n_z())},
            {"n_y", std::to_string(c.grid.n_y())},
            {"L_y", format_double(c.grid.L_y())},
            {"dt", format_double(c.dt)},
            {"t_end", format_double(c.t_end)},
            {"seed", std::to_string(c.seed)},
            {"dealias", c.dealias ? "true" : "false"},
            {"nonlinear", c.nonlinear ? "true" : "false"},
            {"dt_out", format_double(c.dt_out)},
            {"init", c.init == InitKind::wave ? "wave" : "random"},
            {"kappa", format_double(c.kappa)}};
}

const char* const kTimeseriesHeader = "t,E_neq,D,ED,CK2,CK3,F0,H02,V0,u1_neq,u2_neq,omega_neq,theta_neq";

void write_timeseries(const std::vector<EnergyLedger>& ledgers, const std::string& path) {
    if (ledgers.empty()) throw ValidationError("write_timeseries: empty series");
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ValidationError("cannot write timeseries: " + path);
    os << kTimeseriesHeader << '\n';
    for (const auto& L : ledgers) {
        const double v[] = {L.t,  L.E_neq, L.D,      L.ED,     L.CK2,       L.CK3,      L.F0,
                            L.H02, L.V0,   L.u1_neq, L.u2_neq, L.omega_neq, L.theta_neq};
        for (std::size_t i = 0; i < std::size(v); ++i) os << (i ? "," : "") << format_double(v[i]);
        os << '\n';
    }
    if (!os) throw ValidationError("failed writing timeseries: " + path);
}

std::vector<EnergyLedger> read_timeseries(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot read timeseries: " + path);
    std::string line;
    if (!std::getline(is, line) || line != kTimeseriesHeader) throw ValidationError("bad timeseries header: " + path);
    std::vector<EnergyLedger> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        double v[13];
        std::size_t n = 0;
        const char* p = line.c_str();
        while (n < 13) {
            char* end = nullptr;
            v[n++] = std::strtod(p, &end);
            if (end == p) throw ValidationError("malformed timeseries row");
            p = end;
            if (*p == ',') ++p;
        }
        EnergyLedger L;
        L.t = v[0];
        L.E_neq = v[1];
        L.D = v[2];
        L.ED = v[3];
        L.CK2 = v[4];
        L.CK3 = v[5];
        L.F0 = v[6];
        L.H02 = v[7];
        L.V0 = v[8];
        L.u1_neq = v[9];
        L.u2_neq = v[10];
        L.omega_neq = v[11];
        L.theta_neq = v[12];
        out.push_back(L);
    }
    return out;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void append_manifest(const std::string& path, const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["config"] = m.config;
    j["code_version"] = m.code_version;
    j["seed"] = m.seed;
    j["start_time"] = m.start_time;
    j["end_time"] = m.end_time;
    j["outputs"] = m.outputs;
    j["exit_status"] = m.exit_status;
    if (!m.note.empty()) j["note"] = m.note;
    std::ofstream os(path, std::ios::app);
    if (!os) throw ValidationError("cannot append manifest: " + path);
    os << j.dump() << '\n';
}

}  // namespace couette
