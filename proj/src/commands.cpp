#include "igatherm/commands.hpp"

#include <filesystem>
#include <iostream>

namespace igatherm {

namespace {

std::string join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

std::string symmetry_name(SymmetryMode mode) {
    switch (mode) {
        case SymmetryMode::None: return "none";
        case SymmetryMode::X: return "x";
        default: return "xy";
    }
}

void print_terms(const std::map<std::string, double>& terms) {
    for (const auto& [key, value] : terms) std::cout << "  " << key << " = " << value << "\n";
}

}  // namespace

std::vector<double> ProblemBundle::initial_vars() const {
    const int n = symmetry->num_variables();
    std::vector<double> vars(n, 0.5 * (config.laws.design.v_min() + config.laws.design.v_max()));
    if (config.initial_value) {
        std::fill(vars.begin(), vars.end(), *config.initial_value);
    } else if (config.initial_list) {
        if (static_cast<int>(config.initial_list->size()) != n)
            throw ConfigError("design.initial: expected " + std::to_string(n) + " values, got " +
                              std::to_string(config.initial_list->size()));
        vars = *config.initial_list;
    } else if (config.initial_csv) {
        const DensityCsv csv = read_density_csv(*config.initial_csv);
        if (!(csv.spec == field->spec()))
            throw std::invalid_argument("design.initial: density CSV basis does not match the config");
        if (static_cast<int>(csv.coefficients.size()) != field->num_coefficients())
            throw std::invalid_argument("design.initial: density CSV length mismatch");
        // symmetric CSVs carry one value per orbit; take each orbit's representative
        const auto& c2v = symmetry->coefficient_to_variable();
        for (size_t i = 0; i < csv.coefficients.size(); ++i) vars[c2v[i]] = csv.coefficients[i];
    }
    for (double v : vars)
        if (v < config.laws.design.v_min() - 1e-12 || v > config.laws.design.v_max() + 1e-12)
            throw ConfigError("design.initial: value outside the material law's density interval");
    return vars;
}

ProblemBundle build_bundle(const RunConfig& config, int levels_override) {
    ProblemBundle b;
    b.config = config;
    const int levels = levels_override >= 0 ? levels_override : config.levels;

    b.model = build_annulus_model(config.geometry, config.bc);
    b.model.sources = config.sources;
    b.model.source_bandwidth = config.source_bandwidth;
    refine_model(b.model, levels);

    if (config.bc_secondary) {
        b.model_secondary = std::make_unique<MultiPatchModel>(build_annulus_model(config.geometry, *config.bc_secondary));
        refine_model(*b.model_secondary, levels);
    }

    b.field = std::make_unique<DensityField>(config.design);
    b.symmetry = std::make_unique<SymmetryMap>(*b.field, config.symmetry);
    b.disc = std::make_unique<Discretization>(b.model, b.field.get(), config.nitsche);
    if (b.model_secondary)
        b.disc_secondary = std::make_unique<Discretization>(*b.model_secondary, b.field.get(), config.nitsche);

    if (config.objective) {
        b.problem = std::make_unique<DesignProblem>(*b.disc, b.disc_secondary.get(), *b.field, *b.symmetry,
                                                    config.laws, *config.objective, config.constraints);
    }
    return b;
}

int cmd_solve(const RunConfig& config, const std::string& out_dir) {
    ProblemBundle b = build_bundle(config);
    ensure_dir(out_dir);

    const std::vector<double> vars = b.initial_vars();
    const std::vector<double> density = b.symmetry->expand(vars);
    b.field->coefficients() = density;

    const LinearSystem sys = b.disc->assemble(density, config.laws);
    const LinearSolver solver(sys);
    const Eigen::VectorXd T = solver.solve_primal();
    std::cout << "solved " << b.model.num_dofs << " DOFs, reduced residual " << solver.last_residual() << "\n";

    Eigen::VectorXd T_bar;
    if (config.objective) {
        DesignProblem::Evaluation ev = b.problem->evaluate(vars, false);
        std::cout << "objective " << objective_kind_name(config.objective->kind) << ": J = " << ev.J << "\n";
        print_terms(ev.terms);
        T_bar = b.problem->references().T_bar;
    } else {
        T_bar = compute_references(*b.disc, config.laws).T_bar;
    }

    write_vtk_fields(join(out_dir, "fields.vtk"), b.model, T, T_bar, b.field.get(), density, config.laws,
                     config.subdivision);
    write_density_csv(join(out_dir, "density.csv"), *b.field, symmetry_name(config.symmetry));
    std::cout << "wrote " << join(out_dir, "fields.vtk") << "\n";
    return 0;
}

int cmd_optimize(const RunConfig& config, const std::string& out_dir) {
    if (!config.objective) throw ConfigError("optimize: config has no 'objective' block");
    ProblemBundle b = build_bundle(config);
    ensure_dir(out_dir);
    DesignProblem& problem = *b.problem;

    // the oracle caches the latest evaluation so objective and constraint
    // callbacks triggered at the same iterate share one assemble/solve pass
    struct Cache {
        std::vector<double> x;
        DesignProblem::Evaluation ev;
        bool valid = false;
    };
    auto cache = std::make_shared<Cache>();
    auto evaluate_at = [&problem, cache](const std::vector<double>& x) -> const DesignProblem::Evaluation& {
        if (!cache->valid || cache->x != x) {
            cache->ev = problem.evaluate(x, true);
            cache->x = x;
            cache->valid = true;
        }
        return cache->ev;
    };

    Objective objective = [&](const std::vector<double>& x, std::vector<double>& grad,
                              std::map<std::string, double>* terms) {
        const auto& ev = evaluate_at(x);
        grad = ev.grad;
        if (terms) *terms = ev.terms;
        return ev.J;
    };
    std::vector<Constraint> constraints;
    for (size_t k = 0; k < config.constraints.size(); ++k) {
        constraints.push_back([&, k](const std::vector<double>& x, std::vector<double>& grad) {
            const auto& ev = evaluate_at(x);
            grad = ev.g_grad[k];
            return ev.g[k];
        });
    }

    const MinimizeResult result = minimize_constrained(objective, constraints, b.initial_vars(),
                                                       problem.lower_bounds(), problem.upper_bounds(),
                                                       config.optimizer);

    b.field->coefficients() = b.symmetry->expand(result.x);
    const DesignProblem::Evaluation final_ev = problem.evaluate(result.x, false);

    std::cout << "stop reason: " << stop_reason_name(result.reason) << "\n";
    std::cout << "final J = " << final_ev.J << " after " << result.record.rows.back().iteration
              << " iterations (" << problem.primal_solve_count() << " primal solves)\n";
    print_terms(final_ev.terms);

    write_run_csv(join(out_dir, "run.csv"), result.record);
    write_density_csv(join(out_dir, "density.csv"), *b.field, symmetry_name(config.symmetry));
    write_vtk_fields(join(out_dir, "fields.vtk"), b.model, final_ev.T, problem.references().T_bar,
                     b.field.get(), b.field->coefficients(), config.laws, config.subdivision);
    if (final_ev.T_secondary.size() > 0)
        write_vtk_fields(join(out_dir, "fields_secondary.vtk"), *b.model_secondary, final_ev.T_secondary,
                         problem.references_secondary()->T_bar, b.field.get(), b.field->coefficients(),
                         config.laws, config.subdivision);
    std::cout << "wrote " << join(out_dir, "run.csv") << ", density.csv, fields.vtk\n";
    return 0;
}

int cmd_gradcheck(const RunConfig& config, double epsilon) {
    if (!config.objective) throw ConfigError("gradcheck: config has no 'objective' block");
    ProblemBundle b = build_bundle(config);
    DesignProblem& problem = *b.problem;

    std::vector<double> point = b.initial_vars();
    const double lo = config.laws.design.v_min(), hi = config.laws.design.v_max();
    for (double& v : point) v = std::clamp(v, lo + 2 * epsilon, hi - 2 * epsilon);

    Objective objective = [&problem](const std::vector<double>& x, std::vector<double>& grad,
                                     std::map<std::string, double>*) {
        const auto ev = problem.evaluate(x, true);
        grad = ev.grad;
        return ev.J;
    };
    double worst = gradient_audit(objective, point, epsilon);
    std::cout << objective_kind_name(config.objective->kind) << ": max relative discrepancy " << worst << "\n";

    for (size_t k = 0; k < config.constraints.size(); ++k) {
        Objective g_fn = [&problem, k](const std::vector<double>& x, std::vector<double>& grad,
                                       std::map<std::string, double>*) {
            const auto ev = problem.evaluate(x, true);
            grad = ev.g_grad[k];
            return ev.g[k];
        };
        const double g_worst = gradient_audit(g_fn, point, epsilon);
        std::cout << "constraint[" << k << "]: max relative discrepancy " << g_worst << "\n";
        worst = std::max(worst, g_worst);
    }
    return worst > 1e-4 ? 3 : 0;
}

int cmd_convergence(const RunConfig& config, const std::string& out_dir, int max_levels) {
    if (!config.objective) throw ConfigError("convergence: config has no 'objective' block");
    if (max_levels < 2) throw ConfigError("convergence: need at least two refinement levels");
    ensure_dir(out_dir);

    std::vector<std::vector<double>> densities;
    std::vector<int> dofs;
    for (int lvl = 1; lvl <= max_levels; ++lvl) {
        ProblemBundle b = build_bundle(config, lvl);
        const MinimizeResult result =
            minimize(
                [&](const std::vector<double>& x, std::vector<double>& grad, std::map<std::string, double>* t) {
                    const auto ev = b.problem->evaluate(x, true);
                    grad = ev.grad;
                    if (t) *t = ev.terms;
                    return ev.J;
                },
                b.initial_vars(), b.problem->lower_bounds(), b.problem->upper_bounds(), config.optimizer);
        densities.push_back(b.symmetry->expand(result.x));
        dofs.push_back(b.model.num_dofs);
        std::cout << "level " << lvl << ": DOF " << b.model.num_dofs << ", J " << result.J << "\n";
    }

    // density-field error against the finest level, integrated on a fixed
    // parametric grid of the (level-independent) design patch
    ProblemBundle probe = build_bundle(config, 0);
    const Patch& dp = probe.model.patches[1];
    DensityField field(config.design);
    const GaussRule gu = gauss_rule(3), gv = gauss_rule(2);
    auto l2_vs_ref = [&](const std::vector<double>& a, const std::vector<double>& ref) {
        double num = 0.0, den = 0.0;
        for (const auto& [u0, u1] : field.basis().ku().elements()) {
            for (const auto& [v0, v1] : field.basis().kv().elements()) {
                for (size_t qa = 0; qa < gu.nodes.size(); ++qa) {
                    for (size_t qb = 0; qb < gv.nodes.size(); ++qb) {
                        const double u = u0 + (u1 - u0) * gu.nodes[qa];
                        const double v = v0 + (v1 - v0) * gv.nodes[qb];
                        const auto e = field.basis().eval(u, v);
                        double va = 0.0, vr = 0.0;
                        for (int l = 0; l < e.count(); ++l) {
                            const int idx = field.coeff_index(e.index_u(l), e.index_v(l));
                            va += e.value[l] * a[idx];
                            vr += e.value[l] * ref[idx];
                        }
                        const double w = dp.eval_geometry(u, v).detJ * gu.weights[qa] * gv.weights[qb] *
                                         (u1 - u0) * (v1 - v0);
                        num += (va - vr) * (va - vr) * w;
                        den += vr * vr * w;
                    }
                }
            }
        }
        return std::sqrt(num / den);
    };

    std::vector<ConvergenceRow> rows;
    for (int i = 0; i < max_levels; ++i) {
        ConvergenceRow row;
        row.level = i + 1;
        row.dofs = dofs[i];
        row.rel_error = l2_vs_ref(densities[i], densities.back());
        row.meets_threshold = row.rel_error <= 0.02;
        rows.push_back(row);
        std::cout << "level " << row.level << ": DOF " << row.dofs << ", rel error " << row.rel_error
                  << (row.meets_threshold ? "  (within 2%)" : "") << "\n";
    }
    write_convergence_csv(join(out_dir, "convergence.csv"), rows);
    std::cout << "wrote " << join(out_dir, "convergence.csv") << "\n";
    return 0;
}

int cmd_reconstruct(const RunConfig& config, const std::string& out_dir, const std::string& density_csv,
                    double voxel, int samples_per_cell) {
    ProblemBundle b = build_bundle(config, 0);
    ensure_dir(out_dir);

    const DensityCsv csv = read_density_csv(density_csv);
    if (!(csv.spec == b.field->spec()))
        throw std::invalid_argument("reconstruct: density CSV basis does not match the config's design block");
    if (static_cast<int>(csv.coefficients.size()) != b.field->num_coefficients())
        throw std::invalid_argument("reconstruct: density CSV length mismatch");
    b.field->coefficients() = csv.coefficients;

    const ReconstructionResult rec = reconstruct_and_trim(b.model, *b.field, voxel, samples_per_cell);
    write_pgm(join(out_dir, "raster_mask.pgm"), rec.mask);
    write_pgm(join(out_dir, "raster_tessellation.pgm"), rec.tessellation);
    write_pgm(join(out_dir, "raster_trimmed.pgm"), rec.trimmed);
    write_contours_csv(join(out_dir, "contours.csv"), rec.contours);
    std::cout << "voxel grid " << rec.grid.nx << " x " << rec.grid.ny << ", " << rec.contours.size()
              << " contours\n";
    std::cout << "wrote raster_{mask,tessellation,trimmed}.pgm and contours.csv under " << out_dir << "\n";
    return 0;
}

}  // namespace igatherm
