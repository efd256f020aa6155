#include "almton/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace almton {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& source) {
    KeyValueConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        }
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return parse(os.str(), path);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::text(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValueConfig::number(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v->c_str(), &end);
    if (v->empty() || end != v->c_str() + v->size() || errno == ERANGE) {
        throw ConfigError("'" + key + "' expects a number, got '" + *v + "'");
    }
    return d;
}

long long KeyValueConfig::integer(const std::string& key, long long fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    char* end = nullptr;
    errno = 0;
    const long long i = std::strtoll(v->c_str(), &end, 10);
    if (v->empty() || end != v->c_str() + v->size() || errno == ERANGE) {
        throw ConfigError("'" + key + "' expects an integer, got '" + *v + "'");
    }
    return i;
}

std::vector<std::string> KeyValueConfig::list(const std::string& key, const std::vector<std::string>& fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    return split_list(*v);
}

std::vector<std::string> KeyValueConfig::unknown_keys(const std::vector<std::string>& known) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
        if (std::find(known.begin(), known.end(), k) == known.end()) out.push_back(k);
    }
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::vector<std::string> solver_setting_keys() {
    return {"c",        "l",          "eta",          "gamma",          "sigma_cap",     "inner_cap",
            "strategy", "sdp_tol_loose", "sdp_tol_tight", "sdp_tol_switch", "gd_alpha",      "armijo",
            "contraction", "max_backtracks", "cg_max_iter", "cr_sigma0", "cr_sigma_min", "cr_eta",
            "cr_gamma", "lbfgs_memory", "wolfe_c2"};
}

void apply_solver_settings(const KeyValueConfig& cfg, SolverOptions& opts) {
    AlmtonConfig& a = opts.almton;
    a.c = cfg.number("c", a.c);
    a.l = cfg.number("l", a.l);
    a.eta = cfg.number("eta", a.eta);
    a.gamma = cfg.number("gamma", a.gamma);
    a.sigma_cap = cfg.number("sigma_cap", a.sigma_cap);
    a.inner_cap = static_cast<int>(cfg.integer("inner_cap", a.inner_cap));
    if (const auto s = cfg.get("strategy")) {
        try {
            a.strategy = parse_strategy(*s);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    BaselineConfig& b = opts.baseline;
    a.sdp_tol_loose = b.sdp_tol_loose = cfg.number("sdp_tol_loose", a.sdp_tol_loose);
    a.sdp_tol_tight = b.sdp_tol_tight = cfg.number("sdp_tol_tight", a.sdp_tol_tight);
    a.sdp_tol_switch = b.sdp_tol_switch = cfg.number("sdp_tol_switch", a.sdp_tol_switch);
    b.alpha = cfg.number("gd_alpha", b.alpha);
    b.armijo = cfg.number("armijo", b.armijo);
    b.contraction = cfg.number("contraction", b.contraction);
    b.max_backtracks = static_cast<int>(cfg.integer("max_backtracks", b.max_backtracks));
    b.cg_max_iter = static_cast<int>(cfg.integer("cg_max_iter", b.cg_max_iter));
    b.sigma0 = cfg.number("cr_sigma0", b.sigma0);
    b.sigma_min = cfg.number("cr_sigma_min", b.sigma_min);
    b.cr_eta = cfg.number("cr_eta", b.cr_eta);
    b.cr_gamma = cfg.number("cr_gamma", b.cr_gamma);
    b.lbfgs_memory = static_cast<int>(cfg.integer("lbfgs_memory", b.lbfgs_memory));
    b.wolfe_c2 = cfg.number("wolfe_c2", b.wolfe_c2);
    try {
        a.validate();
        b.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace almton
