#ifndef SPINLINK_SCENARIO_HPP
#define SPINLINK_SCENARIO_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "spinlink/model.hpp"

// Configuration-driven scenario runner: sweeps, figure-data reproduction,
// optimization runs, cross-validation.

namespace spinlink {

struct RunOptions {
    std::string out_dir = ".";
    int grid_points = 0;  // 0: scenario default
    std::uint64_t seed = 12345;
};

// Key-value config with [section] headers, `key = value` lines and #-comments.
// Keys are addressed as "section.key" ("key" for the top level).
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& name);

    bool has(const std::string& key) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    int get_int_or(const std::string& key, int fallback) const;

    std::uint64_t hash() const { return hash_; }
    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
    std::uint64_t hash_ = 0;
};

// Node description as written in a config block; realized into NodeParams
// after optional axis substitution.
struct NodeSpec {
    std::optional<double> C, g, gamma, delta;
    std::optional<double> g1, gamma1, delta1;
    std::optional<double> zeta;
    std::optional<double> kappa, kappa1_ratio, kappa1, kappa2;
    bool kappa_opt = false;    // kappa = "opt"
    bool ratio_phase = false;  // kappa1_ratio = "phase"

    NodeParams realize(const std::string& where) const;
    static NodeSpec from_config(const Config& cfg, const std::string& section);
};

// Executes the scenario described by the config file. Exit codes: 0 on
// success, 2 on config errors (no data written), 3 on numerical
// non-convergence (summary still written with converged=false).
int run_scenario(const std::string& config_path, const RunOptions& options);

// Canned data bundles for the reference transfer-function, protocol and
// four-level optimization figures.
int emit_figure_bundle(const std::string& which, const RunOptions& options);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace spinlink

#endif
