#pragma once

#include "almton/bench.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace almton {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Plain-text key=value settings. '#' starts a comment, blank lines are
/// ignored, whitespace around keys and values is trimmed. A repeated key keeps
/// its last value.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text, const std::string& source = "<config>");
    static KeyValueConfig load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;

    // Typed getters throw ConfigError when the value does not parse.
    std::string text(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key, double fallback) const;
    long long integer(const std::string& key, long long fallback) const;
    std::vector<std::string> list(const std::string& key, const std::vector<std::string>& fallback) const;

    /// Keys not in `known`, in sorted order.
    std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Comma-separated list with empty items dropped.
std::vector<std::string> split_list(const std::string& s);

/// Keys recognised by apply_solver_settings.
std::vector<std::string> solver_setting_keys();

/// Copies algorithm parameters (c, l, eta, gamma, sigma_cap, inner_cap,
/// sdp_tol_*, gd_alpha, armijo, ...) into `opts` and validates both configs.
void apply_solver_settings(const KeyValueConfig& cfg, SolverOptions& opts);

}  // namespace almton
