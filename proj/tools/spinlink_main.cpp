#include <CLI11.hpp>

#include "spinlink/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spinlink: heralded entanglement generation via conditional "
                 "single-photon reflection at spin-cavity nodes"};
    app.require_subcommand(1);
    app.fallthrough();

    spinlink::RunOptions options;
    app.add_option("--out", options.out_dir, "output directory")
        ->capture_default_str();
    app.add_option("--grid-points", options.grid_points,
                   "minimum frequency-grid size (0: scenario default)");
    app.add_option("--seed", options.seed,
                   "seed for randomized scenario draws")
        ->capture_default_str();

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run a scenario config file");
    run->add_option("config", config_path, "scenario config file")->required();

    std::string figure;
    CLI::App* figures =
        app.add_subcommand("figures", "emit a canned figure data bundle");
    figures->add_option("which", figure, "fig4, fig5 or fig6")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return spinlink::run_scenario(config_path, options);
    return spinlink::emit_figure_bundle(figure, options);
}
