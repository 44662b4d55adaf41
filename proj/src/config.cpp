#include "igatherm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace igatherm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config error at " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) fail(path, "unknown key '" + key + "'");
}

double need_number(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) fail(path, std::string("missing '") + key + "'");
    if (!j[key].is_number()) fail(path + "." + key, "expected a number");
    return j[key].get<double>();
}

double opt_number(const json& j, const std::string& path, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail(path + "." + key, "expected a number");
    return j[key].get<double>();
}

int opt_int(const json& j, const std::string& path, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) fail(path + "." + key, "expected an integer");
    return j[key].get<int>();
}

std::string need_string(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) fail(path, std::string("missing '") + key + "'");
    if (!j[key].is_string()) fail(path + "." + key, "expected a string");
    return j[key].get<std::string>();
}

StarPerturbation parse_star(const json& j, const std::string& path) {
    check_keys(j, path, {"amplitude", "lobes", "phase"});
    StarPerturbation star;
    star.amplitude = need_number(j, path, "amplitude");
    star.lobes = opt_int(j, path, "lobes", 0);
    if (!j.contains("lobes")) fail(path, "missing 'lobes'");
    star.phase = need_number(j, path, "phase");
    return star;
}

EdgeBC parse_edge(const json& j, const std::string& path) {
    check_keys(j, path, {"type", "value", "flux", "h", "t_ambient"});
    const std::string type = need_string(j, path, "type");
    if (type == "dirichlet") return EdgeBC::dirichlet(need_number(j, path, "value"));
    if (type == "neumann") return EdgeBC::neumann(opt_number(j, path, "flux", 0.0));
    if (type == "adiabatic") return EdgeBC::neumann(0.0);
    if (type == "robin") return EdgeBC::robin(need_number(j, path, "h"), need_number(j, path, "t_ambient"));
    fail(path + ".type", "expected dirichlet | neumann | adiabatic | robin");
}

void parse_bc_block(const json& j, const std::string& path, SquareSideBC& bc,
                    std::vector<PointSource>& sources, double& bandwidth) {
    check_keys(j, path, {"left", "right", "top", "bottom", "sources", "source_bandwidth"});
    for (const char* side : {"left", "right", "top", "bottom"})
        if (!j.contains(side)) fail(path, std::string("missing '") + side + "'");
    bc.left = parse_edge(j["left"], path + ".left");
    bc.right = parse_edge(j["right"], path + ".right");
    bc.top = parse_edge(j["top"], path + ".top");
    bc.bottom = parse_edge(j["bottom"], path + ".bottom");
    if (j.contains("sources")) {
        if (!j["sources"].is_array()) fail(path + ".sources", "expected an array");
        int k = 0;
        for (const auto& s : j["sources"]) {
            const std::string sp = path + ".sources[" + std::to_string(k++) + "]";
            check_keys(s, sp, {"x", "y", "power"});
            sources.push_back({{need_number(s, sp, "x"), need_number(s, sp, "y")}, need_number(s, sp, "power")});
        }
        bandwidth = need_number(j, path, "source_bandwidth");
        if (!(bandwidth > 0.0)) fail(path + ".source_bandwidth", "must be positive");
    }
}

MaterialLaw parse_material(const json& j, const std::string& path) {
    check_keys(j, path, {"law", "kappa", "kappa_matrix", "kappa_filler"});
    const std::string law = need_string(j, path, "law");
    if (law == "constant") return MaterialLaw::constant(need_number(j, path, "kappa"));
    const double km = opt_number(j, path, "kappa_matrix", kKappaCopper);
    if (law == "emt") return MaterialLaw::emt(km, opt_number(j, path, "kappa_filler", kKappaPdms));
    if (law == "maxwell") return MaterialLaw::maxwell(km, opt_number(j, path, "kappa_filler", kKappaPdms));
    if (law == "porous_copper") return MaterialLaw::porous_copper(km);
    if (law == "cu_sn_pb") return MaterialLaw::cu_sn_pb(km);
    if (law == "tcoh") return MaterialLaw::tcoh(km);
    if (law == "gyroid") return MaterialLaw::gyroid_lattice(km);
    fail(path + ".law", "unknown material law '" + law + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& name) {
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        size_t line = 1;
        for (size_t i = 0; i < std::min(text.size(), static_cast<size_t>(e.byte)); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError(name + ":" + std::to_string(line) + ": " + e.what());
    }

    check_keys(j, name,
               {"geometry", "mesh", "bc", "bc_secondary", "materials", "design", "objective", "constraints",
                "nitsche", "optimizer", "output"});
    RunConfig cfg;

    if (!j.contains("geometry")) fail(name, "missing 'geometry'");
    {
        const json& g = j["geometry"];
        const std::string p = "geometry";
        check_keys(g, p, {"L", "R_in", "R_out", "star_inner", "star_outer"});
        cfg.geometry.L = need_number(g, p, "L");
        cfg.geometry.R_in = need_number(g, p, "R_in");
        cfg.geometry.R_out = need_number(g, p, "R_out");
        if (g.contains("star_inner")) cfg.geometry.star_inner = parse_star(g["star_inner"], p + ".star_inner");
        if (g.contains("star_outer")) cfg.geometry.star_outer = parse_star(g["star_outer"], p + ".star_outer");
        if (!(cfg.geometry.R_in > 0 && cfg.geometry.R_in < cfg.geometry.R_out &&
              cfg.geometry.R_out < 0.5 * cfg.geometry.L))
            fail(p, "requires 0 < R_in < R_out < L/2");
    }

    if (j.contains("mesh")) {
        check_keys(j["mesh"], "mesh", {"levels"});
        cfg.levels = opt_int(j["mesh"], "mesh", "levels", 3);
        if (cfg.levels < 0) fail("mesh.levels", "must be non-negative");
    }

    if (!j.contains("bc")) fail(name, "missing 'bc'");
    parse_bc_block(j["bc"], "bc", cfg.bc, cfg.sources, cfg.source_bandwidth);
    if (j.contains("bc_secondary")) {
        SquareSideBC bc2;
        std::vector<PointSource> unused_sources;
        double unused_bw = 0.0;
        parse_bc_block(j["bc_secondary"], "bc_secondary", bc2, unused_sources, unused_bw);
        cfg.bc_secondary = bc2;
    }

    if (!j.contains("materials")) fail(name, "missing 'materials'");
    {
        const json& m = j["materials"];
        check_keys(m, "materials", {"in", "design", "out"});
        for (const char* region : {"in", "design", "out"})
            if (!m.contains(region)) fail("materials", std::string("missing '") + region + "'");
        cfg.laws.in = parse_material(m["in"], "materials.in");
        cfg.laws.design = parse_material(m["design"], "materials.design");
        cfg.laws.out = parse_material(m["out"], "materials.out");
        if (!cfg.laws.in.is_constant()) fail("materials.in", "inner region must be a constant material");
        if (!cfg.laws.out.is_constant()) fail("materials.out", "outer region must be a constant material");
    }

    if (!j.contains("design")) fail(name, "missing 'design'");
    {
        const json& d = j["design"];
        check_keys(d, "design", {"circumferential", "radial_count", "symmetry", "initial"});
        if (!d.contains("circumferential")) fail("design", "missing 'circumferential'");
        const json& c = d["circumferential"];
        check_keys(c, "design.circumferential", {"structure", "count"});
        const std::string structure = need_string(c, "design.circumferential", "structure");
        if (structure == "quarter")
            cfg.design.structure = DesignBasisSpec::Circ::QuarterStructured;
        else if (structure == "uniform")
            cfg.design.structure = DesignBasisSpec::Circ::Uniform;
        else
            fail("design.circumferential.structure", "expected quarter | uniform");
        cfg.design.circ_count = opt_int(c, "design.circumferential", "count", 5);
        cfg.design.radial_count = opt_int(d, "design", "radial_count", 5);
        const std::string sym = d.contains("symmetry") ? d["symmetry"].get<std::string>() : "xy";
        if (sym == "none")
            cfg.symmetry = SymmetryMode::None;
        else if (sym == "x")
            cfg.symmetry = SymmetryMode::X;
        else if (sym == "xy")
            cfg.symmetry = SymmetryMode::XY;
        else
            fail("design.symmetry", "expected none | x | xy");
        if (d.contains("initial")) {
            const json& init = d["initial"];
            if (init.is_number())
                cfg.initial_value = init.get<double>();
            else if (init.is_array())
                cfg.initial_list = init.get<std::vector<double>>();
            else if (init.is_string())
                cfg.initial_csv = init.get<std::string>();
            else
                fail("design.initial", "expected a number, an array, or a density CSV path");
        }
    }

    if (j.contains("objective")) {
        const json& o = j["objective"];
        check_keys(o, "objective", {"kind", "chi", "theta"});
        ObjectiveSpec spec;
        try {
            spec.kind = objective_kind_from_name(need_string(o, "objective", "kind"));
        } catch (const std::invalid_argument& e) {
            fail("objective.kind", e.what());
        }
        spec.chi = opt_number(o, "objective", "chi", 0.0);
        spec.theta = opt_number(o, "objective", "theta", 0.0);
        cfg.objective = spec;
        if (spec.kind == ObjectiveKind::Bidirectional && !cfg.bc_secondary)
            fail("objective", "bidirectional objective requires a 'bc_secondary' block");
    }

    if (j.contains("constraints")) {
        if (!j["constraints"].is_array()) fail("constraints", "expected an array");
        int k = 0;
        for (const auto& c : j["constraints"]) {
            const std::string p = "constraints[" + std::to_string(k++) + "]";
            check_keys(c, p, {"kind", "radius", "T_max", "A"});
            if (need_string(c, p, "kind") != "max_temperature")
                fail(p + ".kind", "only 'max_temperature' constraints are supported");
            ConstraintSpec spec;
            spec.radius = need_number(c, p, "radius");
            spec.t_max = need_number(c, p, "T_max");
            spec.base = opt_number(c, p, "A", 1.5);
            if (!(spec.base > 1.0)) fail(p + ".A", "must exceed 1");
            if (!(spec.radius > 0.0)) fail(p + ".radius", "must be positive");
            cfg.constraints.push_back(spec);
        }
    }

    if (j.contains("nitsche")) {
        check_keys(j["nitsche"], "nitsche", {"beta", "gamma"});
        cfg.nitsche.beta = opt_number(j["nitsche"], "nitsche", "beta", 1e12);
        cfg.nitsche.gamma = opt_number(j["nitsche"], "nitsche", "gamma", 0.5);
        if (!(cfg.nitsche.beta > 0.0)) fail("nitsche.beta", "must be positive");
        if (!(cfg.nitsche.gamma > 0.0 && cfg.nitsche.gamma < 1.0)) fail("nitsche.gamma", "must lie in (0,1)");
    }

    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        check_keys(o, "optimizer",
                   {"max_iterations", "objective_limit", "step_tolerance", "optimality_tolerance", "history",
                    "al"});
        cfg.optimizer.max_iterations = opt_int(o, "optimizer", "max_iterations", 300);
        cfg.optimizer.objective_limit = opt_number(o, "optimizer", "objective_limit", 1e-10);
        cfg.optimizer.step_tolerance = opt_number(o, "optimizer", "step_tolerance", 1e-10);
        cfg.optimizer.optimality_tolerance = opt_number(o, "optimizer", "optimality_tolerance", 1e-10);
        cfg.optimizer.history = opt_int(o, "optimizer", "history", 10);
        if (o.contains("al")) {
            const json& al = o["al"];
            check_keys(al, "optimizer.al", {"mu0", "growth", "max_outer", "feasibility_tol"});
            cfg.optimizer.al_mu0 = opt_number(al, "optimizer.al", "mu0", 10.0);
            cfg.optimizer.al_growth = opt_number(al, "optimizer.al", "growth", 10.0);
            cfg.optimizer.al_max_outer = opt_int(al, "optimizer.al", "max_outer", 10);
            cfg.optimizer.al_feasibility_tol = opt_number(al, "optimizer.al", "feasibility_tol", 1e-6);
        }
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        check_keys(o, "output", {"dir", "subdivision"});
        if (o.contains("dir")) cfg.out_dir = o["dir"].get<std::string>();
        cfg.subdivision = opt_int(o, "output", "subdivision", 4);
        if (cfg.subdivision < 1) fail("output.subdivision", "must be at least 1");
    }

    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

}  // namespace igatherm
