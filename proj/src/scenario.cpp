#include "spinlink/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "spinlink/compare.hpp"
#include "spinlink/optimize.hpp"
#include "spinlink/readout.hpp"
#include "spinlink/timedomain.hpp"

namespace spinlink {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

Config Config::parse_string(const std::string& text, const std::string& name) {
    Config cfg;
    cfg.hash_ = fnv1a64(text);
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(name + ":" + std::to_string(line_no) +
                                  ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(name + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (key.empty()) {
            throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        cfg.values_[full] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("missing config field '" + key + "'");
    }
    return it->second;
}

std::string Config::get_string_or(const std::string& key,
                                  const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config field '" + key + "': not a number: " + raw);
    }
}

double Config::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string raw = get_string(key);
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw ConfigError("config field '" + key + "': expected true/false");
}

int Config::get_int_or(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const double v = get_double(key);
    if (v != std::floor(v)) {
        throw ConfigError("config field '" + key + "': expected an integer");
    }
    return static_cast<int>(v);
}

// ---------------------------------------------------------------------------
// Node specs
// ---------------------------------------------------------------------------

NodeSpec NodeSpec::from_config(const Config& cfg, const std::string& section) {
    NodeSpec spec;
    auto opt = [&](const char* key) -> std::optional<double> {
        const std::string full = section + "." + key;
        if (!cfg.has(full)) return std::nullopt;
        return cfg.get_double(full);
    };
    if (cfg.has(section + ".kappa") && cfg.get_string(section + ".kappa") == "opt") {
        spec.kappa_opt = true;
    } else {
        spec.kappa = opt("kappa");
    }
    if (cfg.has(section + ".kappa1_ratio") &&
        cfg.get_string(section + ".kappa1_ratio") == "phase") {
        spec.ratio_phase = true;
    } else {
        spec.kappa1_ratio = opt("kappa1_ratio");
    }
    spec.C = opt("C");
    spec.g = opt("g");
    spec.gamma = opt("gamma");
    spec.delta = opt("delta");
    spec.g1 = opt("g1");
    spec.gamma1 = opt("gamma1");
    spec.delta1 = opt("delta1");
    spec.zeta = opt("zeta");
    spec.kappa1 = opt("kappa1");
    spec.kappa2 = opt("kappa2");
    return spec;
}

NodeParams NodeSpec::realize(const std::string& where) const {
    const double gamma0 = gamma.value_or(1.0);
    const double delta0 = delta.value_or(0.0);

    double kap;
    if (kappa_opt) {
        if (!C) throw ConfigError("config field '" + where + ".kappa': 'opt' needs C");
        kap = optimal_kappa(*C) * gamma0;
    } else if (kappa) {
        kap = *kappa;
    } else if (kappa1 && kappa2) {
        kap = *kappa1 + *kappa2;
    } else {
        throw ConfigError("config field '" + where +
                          ".kappa': specify kappa (+ kappa1_ratio) or kappa1 + kappa2");
    }

    double ratio;
    if (ratio_phase) {
        if (!C) {
            throw ConfigError("config field '" + where + ".kappa1_ratio': 'phase' needs C");
        }
        ratio = phase_encoding_ratio(*C);
    } else if (kappa1_ratio) {
        ratio = *kappa1_ratio;
    } else if (kappa1) {
        ratio = *kappa1 / kap;
    } else {
        ratio = 1.0;
    }

    double g0;
    if (g) {
        g0 = *g;
    } else if (C) {
        g0 = std::sqrt(*C * kap * gamma0) / 2.0;
    } else {
        g0 = 0.0;
    }

    try {
        if (zeta) {
            FourLevelConfig four;
            four.kappa1 = ratio * kap;
            four.kappa2 = kap - four.kappa1;
            four.g = g0;
            four.gamma = gamma0;
            four.zeta = *zeta;
            four.delta = delta0;
            return expand_four_level(four);
        }
        NodeParams node;
        node.kappa1 = ratio * kap;
        node.kappa2 = kap - node.kappa1;
        node.transitions[0] = {g0, gamma0, delta0};
        node.transitions[1] = {g1.value_or(0.0), gamma1.value_or(gamma0),
                               delta1.value_or(0.0)};
        return validate_node(node);
    } catch (const NonPhysicalParameter& e) {
        throw ConfigError("config field '" + where + "." + e.field + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Buffers rows and writes on flush, so a failed sweep leaves no partial file.
class CsvWriter {
  public:
    CsvWriter(const fs::path& path, const std::string& meta,
              const std::vector<std::string>& columns)
        : path_(path) {
        text_ = "# " + meta + "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) {
            text_ += columns[i];
            text_ += i + 1 == columns.size() ? "\n" : ",";
        }
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            text_ += fmt17(values[i]);
            text_ += i + 1 == values.size() ? "\n" : ",";
        }
    }
    // write only on explicit flush: a sweep that throws leaves no file behind
    void flush() {
        std::ofstream out(path_);
        if (!out) throw ConfigError("cannot open for writing: " + path_.string());
        out << text_;
    }

  private:
    fs::path path_;
    std::string text_;
};

std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

std::vector<double> sweep_values(const Config& cfg) {
    const double lo = cfg.get_double("sweep.min");
    const double hi = cfg.get_double("sweep.max");
    const int n = cfg.get_int_or("sweep.points", 0);
    if (n < 2) throw ConfigError("config field 'sweep.points': need at least 2");
    const bool log_axis = cfg.get_bool_or("sweep.log", false);
    std::vector<double> xs(static_cast<std::size_t>(n));
    if (log_axis) {
        if (!(lo > 0.0) || !(hi > 0.0)) {
            throw ConfigError("config field 'sweep.min': log sweep needs positive bounds");
        }
        const double llo = std::log(lo), lhi = std::log(hi);
        for (int i = 0; i < n; ++i) {
            xs[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (n - 1));
        }
    } else {
        for (int i = 0; i < n; ++i) {
            xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
        }
    }
    return xs;
}

PulseSpec pulse_from_config(const Config& cfg) {
    if (cfg.has("pulse.file")) {
        return load_spectrum_csv(cfg.get_string("pulse.file"));
    }
    GaussianPulse g;
    g.sigma_u = cfg.get_double("pulse.sigma_u");
    g.delta = cfg.get_double_or("pulse.delta", 0.0);
    return g;
}

NodeDeviation deviation_from_config(const Config& cfg) {
    NodeDeviation dev;
    dev.eps_C = cfg.get_double_or("deviation.eps_C", 0.0);
    dev.eps_kappa = cfg.get_double_or("deviation.eps_kappa", 0.0);
    dev.eps_kappa1 = cfg.get_double_or("deviation.eps_kappa1", 0.0);
    dev.eps_gamma = cfg.get_double_or("deviation.eps_gamma", 0.0);
    dev.delta_A = cfg.get_double_or("deviation.delta_A", 0.0);
    dev.delta_B = cfg.get_double_or("deviation.delta_B", 0.0);
    return dev;
}

struct ScenarioContext {
    Config cfg;
    RunOptions options;
    std::string meta;
    fs::path out_dir;
    json summary;
};

// --- transfer-sweep ---------------------------------------------------------

void run_transfer_sweep(ScenarioContext& ctx) {
    NodeSpec spec = NodeSpec::from_config(ctx.cfg, "node_a");
    const std::string axis = ctx.cfg.get_string("sweep.parameter");
    const std::vector<double> xs = sweep_values(ctx.cfg);
    const double omega_fixed = ctx.cfg.get_double_or("omega", 0.0);

    CsvWriter csv(ctx.out_dir / "transfer.csv", ctx.meta,
                  {"axis", "omega", "C", "kappa", "kappa1_ratio", "re_r0", "im_r0",
                   "re_r1", "im_r1", "re_r_plus", "im_r_plus", "re_r_minus",
                   "im_r_minus", "r0_sq", "r1_sq", "r_plus_sq", "r_minus_sq"});
    for (double x : xs) {
        NodeSpec s = spec;
        double omega = omega_fixed;
        if (axis == "omega") {
            omega = x;
        } else if (axis == "kappa") {
            s.kappa = x;
            s.kappa_opt = false;
        } else if (axis == "C") {
            s.C = x;
            s.g.reset();
        } else if (axis == "delta") {
            s.delta = x;
        } else if (axis == "kappa1_ratio") {
            s.kappa1_ratio = x;
            s.ratio_phase = false;
        } else if (axis == "zeta") {
            s.zeta = x;
        } else {
            throw ConfigError("config field 'sweep.parameter': unknown axis '" +
                              axis + "' for transfer-sweep");
        }
        const NodeParams node = s.realize("node_a");
        const TransferEval ev = transfer_pair(node, omega);
        csv.row({x, omega, node.cooperativity(0), node.kappa(),
                 node.kappa1 / node.kappa(), ev.r0.real(), ev.r0.imag(), ev.r1.real(),
                 ev.r1.imag(), ev.r_plus.real(), ev.r_plus.imag(), ev.r_minus.real(),
                 ev.r_minus.imag(), std::norm(ev.r0), std::norm(ev.r1),
                 std::norm(ev.r_plus), std::norm(ev.r_minus)});
    }
    const NodeParams node = spec.realize("node_a");
    ctx.summary["derived"] = {{"kappa", node.kappa()},
                              {"C0", node.cooperativity(0)},
                              {"C1", node.cooperativity(1)}};
    csv.flush();
    ctx.summary["outputs"].push_back("transfer.csv");
}

// --- protocol ----------------------------------------------------------------

void run_protocol_sweep(ScenarioContext& ctx) {
    NodeSpec spec_a = NodeSpec::from_config(ctx.cfg, "node_a");
    bool explicit_b = false;
    for (const auto& [key, value] : ctx.cfg.entries()) {
        if (key.rfind("node_b.", 0) == 0) explicit_b = true;
    }
    const std::string axis = ctx.cfg.get_string("sweep.parameter");
    const std::vector<double> xs = sweep_values(ctx.cfg);
    const int grid_points =
        ctx.options.grid_points > 0 ? ctx.options.grid_points : (1 << 12);

    static const std::vector<std::string> dev_axes = {
        "eps_C", "eps_kappa", "eps_kappa1", "eps_gamma", "delta_A", "delta_B"};
    const bool axis_is_dev =
        std::find(dev_axes.begin(), dev_axes.end(), axis) != dev_axes.end();
    if (axis_is_dev && explicit_b) {
        throw ConfigError("config field 'sweep.parameter': deviation axis "
                          "conflicts with an explicit [node_b]");
    }

    CsvWriter csv(ctx.out_dir / "protocol.csv", ctx.meta,
                  {"axis", "P_a", "P_b", "P_a_over_eta", "P_b_over_eta", "F_a", "F_b",
                   "F_a_taylor", "F_b_taylor", "F_b_phase_error"});

    const bool file_pulse = ctx.cfg.has("pulse.file");
    if (file_pulse && (axis == "sigma_u" || axis == "Delta")) {
        throw ConfigError("config field 'sweep.parameter': cannot sweep '" + axis +
                          "' of a sampled pulse file");
    }
    Spectrum loaded;
    if (file_pulse) loaded = load_spectrum_csv(ctx.cfg.get_string("pulse.file"));
    for (double x : xs) {
        GaussianPulse pulse{ctx.cfg.get_double_or("pulse.sigma_u", 0.0),
                            ctx.cfg.get_double_or("pulse.delta", 0.0)};
        SetupParams setup{ctx.cfg.get_double_or("setup.eta", 1.0),
                          ctx.cfg.get_double_or("setup.phi", 0.0)};
        NodeDeviation dev = deviation_from_config(ctx.cfg);
        if (axis == "sigma_u") {
            pulse.sigma_u = x;
        } else if (axis == "Delta") {
            pulse.delta = x;
        } else if (axis == "eta") {
            setup.eta = x;
        } else if (axis == "phi") {
            setup.phi = x;
        } else if (axis == "eps_C") {
            dev.eps_C = x;
        } else if (axis == "eps_kappa") {
            dev.eps_kappa = x;
        } else if (axis == "eps_kappa1") {
            dev.eps_kappa1 = x;
        } else if (axis == "eps_gamma") {
            dev.eps_gamma = x;
        } else if (axis == "delta_A") {
            dev.delta_A = x;
        } else if (axis == "delta_B") {
            dev.delta_B = x;
        } else {
            throw ConfigError("config field 'sweep.parameter': unknown axis '" +
                              axis + "' for protocol");
        }
        if (!file_pulse && !(pulse.sigma_u > 0.0)) {
            throw ConfigError("config field 'pulse.sigma_u': must be > 0");
        }

        NodeParams node_a = spec_a.realize("node_a");
        NodeParams node_b = node_a;
        const bool has_dev = dev.eps_C != 0.0 || dev.eps_kappa != 0.0 ||
                             dev.eps_kappa1 != 0.0 || dev.eps_gamma != 0.0 ||
                             dev.delta_A != 0.0 || dev.delta_B != 0.0;
        if (explicit_b) {
            node_b = NodeSpec::from_config(ctx.cfg, "node_b").realize("node_b");
        } else if (has_dev) {
            const NodePair pair = apply_deviation(node_a, dev);
            node_a = pair.a;
            node_b = pair.b;
        }

        const PulseSpec pulse_spec =
            file_pulse ? PulseSpec{loaded} : PulseSpec{pulse};
        const ProtocolOutcome outcome =
            run_protocol(node_a, node_b, pulse_spec, setup, grid_points);
        // the bandwidth-Taylor fidelity needs an analytic Gaussian
        const double fa_taylor =
            file_pulse ? std::numeric_limits<double>::quiet_NaN()
                       : fidelity_taylor(node_a, node_b, pulse, Port::a);
        const double fb_taylor =
            file_pulse ? std::numeric_limits<double>::quiet_NaN()
                       : fidelity_taylor(node_a, node_b, pulse, Port::b);
        // interferometer-phase fidelity: defined for identical nodes with a
        // usable heralding mode
        double fb_phase = std::numeric_limits<double>::quiet_NaN();
        const bool identical = !explicit_b && dev.eps_C == 0.0 &&
                               dev.eps_kappa == 0.0 && dev.eps_kappa1 == 0.0 &&
                               dev.eps_gamma == 0.0 && dev.delta_A == dev.delta_B;
        if (identical) {
            try {
                const Spectrum& u = outcome.amplitudes.u;
                const ModeDecomposition modes =
                    decompose_modes(u, transfer_on_grid(node_a, u.grid.omegas()));
                fb_phase = phase_error_fidelity(setup.phi, modes);
            } catch (const DegenerateAntisymmetric&) {
            }
        }
        csv.row({x, outcome.P_a, outcome.P_b, outcome.P_a / setup.eta,
                 outcome.P_b / setup.eta, outcome.F_a, outcome.F_b, fa_taylor,
                 fb_taylor, fb_phase});
    }
    ctx.summary["derived"] = {{"target_state_port_a", "phi_minus"},
                              {"target_state_port_b", "psi_minus"},
                              {"grid_points", grid_points}};
    csv.flush();
    ctx.summary["outputs"].push_back("protocol.csv");
}

// --- optimize ----------------------------------------------------------------

void run_optimize(ScenarioContext& ctx) {
    const std::string task = ctx.cfg.get_string("optimize.task");
    if (task == "kappa-opt") {
        const double C = ctx.cfg.get_double("optimize.C");
        const double kappa_opt = optimal_kappa(C);
        const double ratio = phase_encoding_ratio(C);
        FlatnessProblem problem;
        problem.C = C;
        problem.component = TransferComponent::r_minus;
        problem.kappa1_ratio = ratio;
        const OptimizationResult flat = flatness_optimize(problem);
        ctx.summary["derived"] = {{"kappa_opt", kappa_opt},
                                  {"phase_encoding_ratio", ratio},
                                  {"kappa_numeric", flat.value("kappa")},
                                  {"objective", flat.objective},
                                  {"evaluations", flat.evaluations}};
        ctx.summary["converged"] = flat.converged;
        CsvWriter csv(ctx.out_dir / "optimize.csv", ctx.meta,
                      {"C", "kappa_opt", "phase_encoding_ratio", "kappa_numeric"});
        csv.row({C, kappa_opt, ratio, flat.value("kappa")});
        csv.flush();
        ctx.summary["outputs"].push_back("optimize.csv");
    } else if (task == "flatness") {
        FlatnessProblem problem;
        problem.C = ctx.cfg.get_double("optimize.C");
        problem.gamma = ctx.cfg.get_double_or("optimize.gamma", 1.0);
        problem.delta = ctx.cfg.get_double_or("optimize.delta", 0.0);
        problem.kappa1_ratio = ctx.cfg.get_double_or("optimize.kappa1_ratio", 1.0);
        problem.free_ratio = ctx.cfg.get_bool_or("optimize.free_ratio", false);
        problem.kappa_lo = ctx.cfg.get_double_or("optimize.kappa_lo", 0.5);
        problem.kappa_hi = ctx.cfg.get_double_or("optimize.kappa_hi", 50.0);
        const std::string comp = ctx.cfg.get_string_or("optimize.component", "r_minus");
        if (comp == "r_minus") {
            problem.component = TransferComponent::r_minus;
        } else if (comp == "r_plus") {
            problem.component = TransferComponent::r_plus;
        } else {
            throw ConfigError("config field 'optimize.component': r_minus or r_plus");
        }
        const OptimizationResult res = flatness_optimize(problem);
        CsvWriter csv(ctx.out_dir / "flatness.csv", ctx.meta,
                      {"kappa", "abs_d2_modsq"});
        const double ratio_used = problem.free_ratio ? res.value("kappa1_ratio")
                                                     : problem.kappa1_ratio;
        for (int i = 0; i <= 48; ++i) {
            const double kappa =
                problem.kappa_lo +
                (problem.kappa_hi - problem.kappa_lo) * i / 48.0;
            const NodeParams node =
                make_three_level(problem.C, kappa, ratio_used, problem.gamma, 0.0);
            csv.row({kappa,
                     std::abs(d2_modsq(node, problem.component, problem.delta))});
        }
        csv.flush();
        ctx.summary["outputs"].push_back("flatness.csv");
        ctx.summary["derived"] = {{"kappa", res.value("kappa")},
                                  {"objective", res.objective},
                                  {"evaluations", res.evaluations}};
        if (problem.free_ratio) {
            ctx.summary["derived"]["kappa1_ratio"] = res.value("kappa1_ratio");
        }
        ctx.summary["converged"] = res.converged;
    } else if (task == "intensity-roots") {
        const NodeParams node = NodeSpec::from_config(ctx.cfg, "node_a").realize("node_a");
        const IntensityEncodingRoots roots = intensity_encoding_points(node);
        CsvWriter csv(ctx.out_dir / "roots.csv", ctx.meta,
                      {"omega", "delta", "transition", "contrast"});
        json jroots = json::array();
        for (const auto& r : roots.roots) {
            csv.row({r.omega, r.delta, static_cast<double>(r.transition),
                     roots.contrast});
            jroots.push_back({{"omega", r.omega},
                              {"delta", r.delta},
                              {"transition", r.transition}});
        }
        csv.flush();
        ctx.summary["derived"] = {{"roots", jroots}, {"contrast", roots.contrast}};
        ctx.summary["outputs"].push_back("roots.csv");
    } else {
        throw ConfigError("config field 'optimize.task': unknown task '" + task + "'");
    }
}

// --- timedomain-check ----------------------------------------------------------

void run_timedomain_check(ScenarioContext& ctx) {
    const int draws = ctx.cfg.get_int_or("timedomain.draws", 0);
    const int grid_points =
        ctx.options.grid_points > 0 ? ctx.options.grid_points : (1 << 12);

    if (draws <= 0) {
        const NodeParams node = NodeSpec::from_config(ctx.cfg, "node_a").realize("node_a");
        const PulseSpec pulse = pulse_from_config(ctx.cfg);
        const ScatteringResult result =
            integrate_scattering(node, pulse, std::nullopt, {}, grid_points);
        write_trajectory_csv((ctx.out_dir / "trajectory.csv").string(),
                             result.trajectory);
        const double err0 = reconstruction_error_l2(result, node, 0);
        const double err1 = reconstruction_error_l2(result, node, 1);
        ctx.summary["derived"] = {{"l2_error_branch0", err0},
                                  {"l2_error_branch1", err1},
                                  {"norm_final", result.norm_final},
                                  {"steps_accepted", result.steps_accepted}};
        ctx.summary["outputs"].push_back("trajectory.csv");
        return;
    }

    std::mt19937_64 rng(ctx.options.seed);
    auto uniform = [&](double lo, double hi) {
        const double x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * x;
    };
    CsvWriter csv(ctx.out_dir / "timedomain_check.csv", ctx.meta,
                  {"draw", "C", "kappa", "kappa1_ratio", "zeta", "sigma_u",
                   "l2_error_branch0", "l2_error_branch1", "norm_final"});
    double worst = 0.0;
    for (int d = 0; d < draws; ++d) {
        const double C = uniform(0.3, 4.0);
        const double kappa = uniform(2.0, 20.0);
        const double ratio = uniform(0.55, 1.0);
        const double sigma = uniform(0.1, 1.0);
        const bool four_level = (d % 2) == 1;
        const double zeta = four_level ? uniform(1.0, 8.0) : 0.0;
        NodeParams node;
        if (four_level) {
            FourLevelConfig cfg;
            cfg.kappa1 = ratio * kappa;
            cfg.kappa2 = kappa - cfg.kappa1;
            cfg.g = std::sqrt(C * kappa / 4.0);
            cfg.gamma = 1.0;
            cfg.zeta = zeta;
            cfg.delta = uniform(-1.0, 1.0);
            node = expand_four_level(cfg);
        } else {
            node = make_three_level(C, kappa, ratio, 1.0, uniform(-0.5, 0.5));
        }
        const ScatteringResult result = integrate_scattering(
            node, GaussianPulse{sigma, 0.0}, std::nullopt, {}, grid_points);
        const double err0 = reconstruction_error_l2(result, node, 0);
        const double err1 = reconstruction_error_l2(result, node, 1);
        worst = std::max({worst, err0, err1});
        csv.row({static_cast<double>(d), C, kappa, ratio, zeta, sigma, err0, err1,
                 result.norm_final});
    }
    ctx.summary["derived"] = {{"draws", draws}, {"max_l2_error", worst}};
    csv.flush();
    ctx.summary["outputs"].push_back("timedomain_check.csv");
}

// --- compare -------------------------------------------------------------------

void run_compare(ScenarioContext& ctx) {
    const NodeParams node = NodeSpec::from_config(ctx.cfg, "node_a").realize("node_a");
    const PulseSpec pulse = pulse_from_config(ctx.cfg);
    const double eta = ctx.cfg.get_double_or("setup.eta", 1.0);
    const double theta = ctx.cfg.get_double_or("compare.theta_prep", 0.1);
    const int grid_points =
        ctx.options.grid_points > 0 ? ctx.options.grid_points : (1 << 12);
    const ComparisonReport report = compare_protocols(node, pulse, eta, theta, grid_points);
    CsvWriter csv(ctx.out_dir / "compare.csv", ctx.meta,
                  {"p_em", "p_barrett_kok", "p_single_click",
                   "p_reflection_single_port", "p_reflection_two_port",
                   "barrett_kok_gap"});
    csv.row({report.p_em, report.p_barrett_kok, report.p_single_click,
             report.p_reflection_single_port, report.p_reflection_two_port,
             report.barrett_kok_gap});
    ctx.summary["derived"] = {{"regime_gamma_small", report.regime_gamma_small},
                              {"regime_narrow_pulse", report.regime_narrow_pulse},
                              {"matches_barrett_kok", report.matches_barrett_kok},
                              {"single_click_regime_ok", report.single_click_regime_ok}};
    csv.flush();
    ctx.summary["outputs"].push_back("compare.csv");
}

// --- siv-sweep -------------------------------------------------------------------

void run_siv_sweep(ScenarioContext& ctx) {
    const double zeta = ctx.cfg.get_double("node_a.zeta");
    const double gamma = ctx.cfg.get_double_or("node_a.gamma", 1.0);
    const double kappa = ctx.cfg.get_double("node_a.kappa");
    const std::string axis = ctx.cfg.get_string("sweep.parameter");
    if (axis != "C") {
        throw ConfigError("config field 'sweep.parameter': siv-sweep supports C");
    }
    const std::vector<double> xs = sweep_values(ctx.cfg);

    CsvWriter csv(ctx.out_dir / "siv_sweep.csv", ctx.meta,
                  {"C", "delta_o", "omega_o", "kappa1_ratio", "r_minus_sq_peak",
                   "normalized_peak", "r_plus_sq_at_omega_o", "d2_rm_at_omega_o",
                   "d2_rp_at_omega_o"});
    bool all_converged = true;
    for (double C : xs) {
        FourLevelConfig cfg;
        cfg.kappa1 = kappa;
        cfg.kappa2 = 0.0;
        cfg.g = std::sqrt(C * kappa * gamma) / 2.0;
        cfg.gamma = gamma;
        cfg.zeta = zeta;
        cfg.delta = 0.0;
        OptimizationResult res;
        try {
            res = optimize_siv_detuning(cfg, kappa, Kappa1Mode::enforce_phase_encoding);
        } catch (const NotConverged&) {
            all_converged = false;
            continue;
        }
        const double ratio = res.value("kappa1_ratio");
        FourLevelConfig at;
        at.kappa1 = ratio * kappa;
        at.kappa2 = kappa - at.kappa1;
        at.g = cfg.g;
        at.gamma = gamma;
        at.zeta = zeta;
        at.delta = res.value("delta_o");
        const NodeParams node = expand_four_level(at);
        const double omega_o = res.value("omega_o");
        csv.row({C, res.value("delta_o"), omega_o, ratio, res.objective,
                 res.value("normalized_peak"), res.value("r_plus_sq_at_omega_o"),
                 d2_modsq(node, TransferComponent::r_minus, omega_o),
                 d2_modsq(node, TransferComponent::r_plus, omega_o)});
    }
    ctx.summary["derived"] = {
        {"threshold_C", std::sqrt(zeta * zeta / (gamma * gamma) + 1.0)},
        {"kappa", kappa},
        {"zeta", zeta}};
    ctx.summary["converged"] = all_converged;
    csv.flush();
    ctx.summary["outputs"].push_back("siv_sweep.csv");
    if (!all_converged) throw NotConverged("siv-sweep: optimization failed somewhere");
}

// --- readout -------------------------------------------------------------------

void run_readout(ScenarioContext& ctx) {
    const NodeParams node = NodeSpec::from_config(ctx.cfg, "node_a").realize("node_a");
    const PulseSpec pulse = pulse_from_config(ctx.cfg);
    const int grid_points =
        ctx.options.grid_points > 0 ? ctx.options.grid_points : (1 << 12);
    const ReadoutReport intensity = intensity_readout(node, pulse, grid_points);
    const ReadoutReport phase = phase_readout(node, pulse, grid_points);
    CsvWriter csv(ctx.out_dir / "readout.csv", ctx.meta,
                  {"p_reflect_state0", "p_reflect_state1", "contrast",
                   "pa_state0", "pb_state0", "pa_state1", "pb_state1",
                   "phase_readout_error"});
    csv.row({intensity.p_reflect_state0, intensity.p_reflect_state1,
             intensity.contrast, phase.port_probs[0][0], phase.port_probs[0][1],
             phase.port_probs[1][0], phase.port_probs[1][1], phase.readout_error});
    ctx.summary["derived"] = {{"phase_readout_error", phase.readout_error}};
    csv.flush();
    ctx.summary["outputs"].push_back("readout.csv");
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

namespace {

int run_context(ScenarioContext& ctx, const std::string& kind) {
    ctx.summary["scenario"] = kind;
    ctx.summary["config_hash"] = hash_hex(ctx.cfg.hash());
    ctx.summary["converged"] = true;
    ctx.summary["outputs"] = json::array();
    fs::create_directories(ctx.out_dir);

    try {
        if (kind == "transfer-sweep") {
            run_transfer_sweep(ctx);
        } else if (kind == "protocol") {
            run_protocol_sweep(ctx);
        } else if (kind == "optimize") {
            run_optimize(ctx);
        } else if (kind == "timedomain-check") {
            run_timedomain_check(ctx);
        } else if (kind == "compare") {
            run_compare(ctx);
        } else if (kind == "siv-sweep") {
            run_siv_sweep(ctx);
        } else if (kind == "readout") {
            run_readout(ctx);
        } else {
            throw ConfigError("config field 'scenario': unknown kind '" + kind + "'");
        }
    } catch (const NotConverged& e) {
        ctx.summary["converged"] = false;
        ctx.summary["error"] = e.what();
        write_json(ctx.out_dir / "summary.json", ctx.summary);
        std::fprintf(stderr, "spinlink: %s\n", e.what());
        return 3;
    }
    write_json(ctx.out_dir / "summary.json", ctx.summary);
    return 0;
}

}  // namespace

int run_scenario(const std::string& config_path, const RunOptions& options) {
    ScenarioContext ctx;
    ctx.options = options;
    ctx.out_dir = options.out_dir;
    try {
        ctx.cfg = Config::parse_file(config_path);
        // config-level output directory unless the caller chose one
        if (options.out_dir == "." && ctx.cfg.has("out")) {
            ctx.out_dir = ctx.cfg.get_string("out");
        }
        const std::string kind = ctx.cfg.get_string("scenario");
        ctx.meta = "spinlink scenario=" + kind +
                   " config_hash=" + hash_hex(ctx.cfg.hash());
        return run_context(ctx, kind);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "spinlink: config error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "spinlink: %s\n", e.what());
        return 2;
    }
}

// ---------------------------------------------------------------------------
// Figure bundles
// ---------------------------------------------------------------------------

namespace {

void emit_fig4(const fs::path& dir, const std::string& meta) {
    CsvWriter csv(dir / "fig4.csv", meta,
                  {"omega", "C", "kappa", "r_minus_sq", "r_plus_sq",
                   "r_minus_sq_normalized"});
    json rows = json::array();
    for (double C : {1.0, 2.0}) {
        const double kopt = optimal_kappa(C);
        const double ratio = phase_encoding_ratio(C);
        for (double mult : {0.5, 1.0, 2.0}) {
            const double kappa = mult * kopt;
            const NodeParams node = make_three_level(C, kappa, ratio);
            for (int i = 0; i < 801; ++i) {
                const double w = -10.0 + 20.0 * i / 800.0;
                const TransferEval ev = transfer_pair(node, w);
                const double norm_factor = (node.kappa() / node.kappa1) *
                                           (node.kappa() / node.kappa1);
                csv.row({w, C, kappa, std::norm(ev.r_minus), std::norm(ev.r_plus),
                         std::norm(ev.r_minus) * norm_factor});
            }
            rows.push_back({{"C", C}, {"kappa", kappa}});
        }
    }
    csv.flush();
    json j = {{"figure", "fig4"}, {"curves", rows}, {"outputs", {"fig4.csv"}}};
    write_json(dir / "fig4.json", j);
}

void emit_fig5(const fs::path& dir, const std::string& meta, int grid_points) {
    const double C = 2.0;
    const double ratio = phase_encoding_ratio(C);
    const double kopt = optimal_kappa(C);
    CsvWriter csv(dir / "fig5.csv", meta,
                  {"sigma_u", "kappa", "P_a_over_eta", "P_b_over_eta", "F_a", "F_b",
                   "F_a_taylor", "F_a_perturbative"});
    const int n_sigma = 41;
    for (double mult : {1.0, 2.0}) {
        const double kappa = mult * kopt;
        const NodeParams node = make_three_level(C, kappa, ratio);
        for (int i = 0; i < n_sigma; ++i) {
            const double sigma =
                0.01 * std::pow(3.0 / 0.01, static_cast<double>(i) / (n_sigma - 1));
            const GaussianPulse pulse{sigma, 0.0};
            const ProtocolOutcome outcome =
                run_protocol(node, node, pulse, SetupParams{1.0, 0.0},
                             std::max(grid_points, 1 << 12));
            const double fa_taylor = fidelity_taylor(node, node, pulse, Port::a);
            const double fa_pert = fidelity_nv_perturbative(
                C, kappa, ratio * kappa, 1.0, NodeDeviation{}, sigma, Port::a);
            csv.row({sigma, kappa, outcome.P_a, outcome.P_b, outcome.F_a, outcome.F_b,
                     fa_taylor, fa_pert});
        }
    }
    csv.flush();
    json j = {{"figure", "fig5"},
              {"C", C},
              {"kappa_opt", kopt},
              {"phase_encoding_ratio", ratio},
              {"outputs", {"fig5.csv"}}};
    write_json(dir / "fig5.json", j);
}

void emit_fig6(const fs::path& dir, const std::string& meta) {
    const double zeta = 10.0;
    const double kappa = 100.0;
    CsvWriter csv(dir / "fig6.csv", meta,
                  {"C", "delta_o", "omega_o", "kappa1_ratio", "r_minus_sq_peak",
                   "normalized_peak", "r_plus_sq_at_omega_o", "d2_rm_at_omega_o",
                   "d2_rp_at_omega_o"});
    CsvWriter maps(dir / "fig6_maps.csv", meta,
                   {"C", "omega", "r_minus_sq", "r_plus_sq"});
    const int n_c = 25;
    for (int i = 0; i < n_c; ++i) {
        const double C = std::pow(10.0, 2.0 * i / (n_c - 1));  // 1 .. 100
        FourLevelConfig cfg;
        cfg.kappa1 = kappa;
        cfg.kappa2 = 0.0;
        cfg.g = std::sqrt(C * kappa) / 2.0;
        cfg.gamma = 1.0;
        cfg.zeta = zeta;
        cfg.delta = 0.0;
        const OptimizationResult res =
            optimize_siv_detuning(cfg, kappa, Kappa1Mode::enforce_phase_encoding);
        const double ratio = res.value("kappa1_ratio");
        FourLevelConfig at = cfg;
        at.kappa1 = ratio * kappa;
        at.kappa2 = kappa - at.kappa1;
        at.delta = res.value("delta_o");
        const NodeParams node = expand_four_level(at);
        const double omega_o = res.value("omega_o");
        csv.row({C, res.value("delta_o"), omega_o, ratio, res.objective,
                 res.value("normalized_peak"), res.value("r_plus_sq_at_omega_o"),
                 d2_modsq(node, TransferComponent::r_minus, omega_o),
                 d2_modsq(node, TransferComponent::r_plus, omega_o)});
        for (int m = 0; m < 201; ++m) {
            const double w = -25.0 + 50.0 * m / 200.0;
            const TransferEval ev = transfer_pair(node, w);
            maps.row({C, w, std::norm(ev.r_minus), std::norm(ev.r_plus)});
        }
    }
    csv.flush();
    maps.flush();
    json j = {{"figure", "fig6"},
              {"zeta", zeta},
              {"kappa", kappa},
              {"threshold_C", std::sqrt(zeta * zeta + 1.0)},
              {"outputs", {"fig6.csv", "fig6_maps.csv"}}};
    write_json(dir / "fig6.json", j);
}

}  // namespace

int emit_figure_bundle(const std::string& which, const RunOptions& options) {
    const fs::path dir = options.out_dir;
    try {
        fs::create_directories(dir);
        const std::string meta =
            "spinlink figures=" + which + " config_hash=" + hash_hex(fnv1a64(which));
        if (which == "fig4") {
            emit_fig4(dir, meta);
        } else if (which == "fig5") {
            emit_fig5(dir, meta, options.grid_points);
        } else if (which == "fig6") {
            emit_fig6(dir, meta);
        } else {
            throw ConfigError("unknown figure bundle '" + which +
                              "' (expected fig4, fig5 or fig6)");
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "spinlink: config error: %s\n", e.what());
        return 2;
    } catch (const NotConverged& e) {
        std::fprintf(stderr, "spinlink: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "spinlink: %s\n", e.what());
        return 2;
    }
    return 0;
}

}  // namespace spinlink
