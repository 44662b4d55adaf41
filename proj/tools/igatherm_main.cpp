#include <CLI11.hpp>
#include <iostream>

#include "igatherm/commands.hpp"
#include "igatherm/linsolve.hpp"

using namespace igatherm;

int main(int argc, char** argv) {
    CLI::App app{"Isogeometric density-based design of thermal meta-structures"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int levels = -1;
    double epsilon = 1e-6;
    double voxel = 0.0;
    std::string density_csv;
    int max_levels = 4;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration file")->required();
        cmd->add_option("--out", out_dir, "output directory (default: config output.dir)");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve the forward problem and export fields");
    add_common(solve);
    CLI::App* optimize = app.add_subcommand("optimize", "run the design optimization");
    add_common(optimize);
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "audit adjoint gradients against differences");
    add_common(gradcheck);
    gradcheck->add_option("--epsilon", epsilon, "central-difference step");
    CLI::App* convergence = app.add_subcommand("convergence", "mesh-sensitivity study of the optimization");
    add_common(convergence);
    convergence->add_option("--levels", max_levels, "number of refinement levels to sweep");
    CLI::App* reconstruct = app.add_subcommand("reconstruct", "rebuild the cellular structure from a density CSV");
    add_common(reconstruct);
    reconstruct->add_option("--density", density_csv, "density coefficient CSV")->required();
    reconstruct->add_option("--voxel", voxel, "unit-cell size in mm")->required();

    solve->add_option("--levels", levels, "override mesh.levels");
    optimize->add_option("--levels", levels, "override mesh.levels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    try {
        RunConfig config = parse_config_file(config_path);
        if (levels >= 0) config.levels = levels;
        const std::string dir = out_dir.empty() ? config.out_dir : out_dir;
        if (solve->parsed()) return cmd_solve(config, dir);
        if (optimize->parsed()) return cmd_optimize(config, dir);
        if (gradcheck->parsed()) return cmd_gradcheck(config, epsilon);
        if (convergence->parsed()) return cmd_convergence(config, dir, max_levels);
        if (reconstruct->parsed()) return cmd_reconstruct(config, dir, density_csv, voxel);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
