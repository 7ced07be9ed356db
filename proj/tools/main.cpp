// biphos — command-line workbench for the bistable-phosphorylation /
// nucleocytoplasmic-transport model: trajectories, phase-plane geometry,
// bifurcation diagrams, regime maps, and stochastic ensembles, all emitted
// as machine-readable CSV/JSON next to a metadata file that embeds the fully
// resolved configuration (so any output can be regenerated from its meta).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "biphos/continuation.hpp"
#include "biphos/csv.hpp"
#include "biphos/integrate.hpp"
#include "biphos/model.hpp"
#include "biphos/params.hpp"
#include "biphos/phase.hpp"
#include "biphos/stochastic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace biphos;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir = ".";
    std::string prefix;
    std::uint64_t seed = 12345;
    int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& c, const std::string& default_prefix) {
    c.prefix = default_prefix;
    cmd->add_option("--config", c.config_path, "key = value parameter file");
    cmd->add_option("--set", c.sets,
                    "KEY=VALUE parameter override (repeatable; wins over --config)");
    cmd->add_option("--out", c.out_dir, "output directory (created if missing)");
    cmd->add_option("--prefix", c.prefix, "output filename prefix");
    cmd->add_option("--seed", c.seed, "base RNG seed for stochastic runs");
    cmd->add_option("--jobs", c.jobs, "worker threads for grid/sweep subcommands")
        ->check(CLI::PositiveNumber);
}

/// defaults -> --config file -> --set overrides, then validate.
Params resolve_params(const CommonOpts& c) {
    Params p = c.config_path.empty() ? Params{} : params_from_config_file(c.config_path);
    for (const auto& s : c.sets) apply_param_assignment(p, s);
    p.validate();
    return p;
}

/// Collects written files and renders the shared metadata document.
struct Run {
    CommonOpts common;
    Params params;
    std::string subcommand;
    std::vector<std::string> outputs;

    Run(const CommonOpts& c, const std::string& sub) : common(c), subcommand(sub) {
        params = resolve_params(c);
        fs::create_directories(common.out_dir);
    }

    fs::path path(const std::string& suffix) const {
        return fs::path(common.out_dir) / (common.prefix + suffix);
    }

    void write(const std::string& suffix, const std::string& data) {
        const fs::path p = path(suffix);
        atomic_write_file(p.string(), data);
        outputs.push_back(p.filename().string());
    }

    json params_json() const {
        json j;
        j["k_vn"] = params.k_vn;
        j["k_vcy"] = params.k_vcy;
        j["k_nt"] = params.k_nt;
        j["K_c"] = params.K_c;
        j["tau"] = params.tau;
        j["A_cyto"] = params.A_cyto;
        j["A_n"] = params.A_n;
        j["m"] = params.m;
        j["m_sca"] = params.m_sca;
        j["sigma"] = params.sigma;
        j["use_piecewise_fsca"] = params.use_piecewise_fsca;
        return j;
    }

    void write_meta(const json& options) {
        json meta;
        meta["tool"] = "biphos";
        meta["subcommand"] = subcommand;
        meta["seed"] = common.seed;
        meta["jobs"] = common.jobs;
        meta["params"] = params_json();
        // The exact text a --config file needs to reproduce this run.
        meta["resolved_config"] = params_to_config(params);
        meta["options"] = options;
        meta["outputs"] = outputs;
        write("_meta.json", meta.dump(2) + "\n");
    }
};

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (tok.empty()) throw std::invalid_argument(what + ": empty entry in '" + s + "'");
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument(what + ": cannot parse '" + tok + "'");
        }
        if (used != tok.size()) throw std::invalid_argument(what + ": cannot parse '" + tok + "'");
        out.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<double> spaced_values(double lo, double hi, int n, bool log_spaced,
                                  const std::string& what) {
    if (n < 1) throw std::invalid_argument(what + ": need at least 1 value");
    if (n == 1) return {lo};
    if (!(lo < hi)) throw std::invalid_argument(what + ": need lo < hi");
    if (log_spaced && !(lo > 0)) throw std::invalid_argument(what + ": log spacing needs lo > 0");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        v[static_cast<std::size_t>(i)] =
            log_spaced ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    return v;
}

void warn_sde_step(const Params& p, double dt) {
    if (p.tau < 10.0 * dt)
        std::cerr << "biphos: warning: tau = " << p.tau << " is below 10*dt = " << 10.0 * dt
                  << "; the fixed stochastic step may under-resolve the phosphorylation switch"
                  << " (reduce --dt)\n";
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
    std::string model = "reduced";
    double t_end = 100.0;
    double out_dt = 0.025;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double dt = 1e-3;
    std::string x0;
};

void cmd_simulate(const CommonOpts& common, const SimulateOpts& o) {
    Run run(common, "simulate");
    const Params& p = run.params;
    if (o.model != "reduced" && o.model != "full")
        throw std::invalid_argument("--model must be 'reduced' or 'full'");
    const bool stochastic = p.sigma > 0;
    if (stochastic && o.model == "full")
        throw std::invalid_argument(
            "stochastic integration (sigma > 0) supports the reduced model only");

    SolverConfig sc;
    sc.t_end = o.t_end;
    sc.rel_tol = o.rel_tol;
    sc.abs_tol = o.abs_tol;
    sc.dt = o.dt;
    sc.output_times = SolverConfig::uniform_grid(o.t_end, o.out_dt);
    sc.validate();

    std::vector<double> x0_list;
    if (!o.x0.empty()) x0_list = parse_double_list(o.x0, "--x0");

    Trajectory traj;
    std::vector<std::string> header;
    if (o.model == "reduced") {
        Vec2 x0(0.6 * p.K_c, 0.2 * p.K_c);
        if (!x0_list.empty()) {
            if (x0_list.size() != 2)
                throw std::invalid_argument("--x0 for the reduced model needs 2 values");
            x0 = Vec2(x0_list[0], x0_list[1]);
        }
        if (stochastic) {
            warn_sde_step(p, o.dt);
            traj = integrate_sde(p, x0, sc, common.seed);
        } else {
            traj = integrate_reduced(p, x0, sc);
        }
        header = {"t", "c_no", "c_nop"};
    } else {
        Vec7 x0;
        if (x0_list.empty()) {
            x0 = make_consistent_full_state(0.6 * p.K_c, 0.2 * p.K_c, p);
        } else if (x0_list.size() == 2) {
            x0 = make_consistent_full_state(x0_list[0], x0_list[1], p);
        } else if (x0_list.size() == 7) {
            for (int i = 0; i < 7; ++i) x0[i] = x0_list[static_cast<std::size_t>(i)];
        } else {
            throw std::invalid_argument(
                "--x0 for the full model needs 2 values (consistent completion) or all 7");
        }
        traj = integrate_full(p, x0, sc);
        header = {"t", "c_no", "c_nop", "c_ni", "c_cy", "Phi", "V_n", "V_cyto"};
    }

    CsvWriter csv(header);
    const Eigen::Index ncols = traj.states.cols();
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(ncols) + 1);
        row.push_back(traj.times[i]);
        for (Eigen::Index j = 0; j < ncols; ++j)
            row.push_back(traj.states(static_cast<Eigen::Index>(i), j));
        csv.add_row(row);
    }
    run.write("_trajectory.csv", csv.str());

    json opts;
    opts["model"] = o.model;
    opts["t_end"] = o.t_end;
    opts["out_dt"] = o.out_dt;
    opts["rel_tol"] = o.rel_tol;
    opts["abs_tol"] = o.abs_tol;
    opts["dt"] = o.dt;
    opts["stochastic"] = stochastic;
    json x0j = json::array();
    for (Eigen::Index j = 0; j < traj.states.cols(); ++j) x0j.push_back(traj.states(0, j));
    opts["x0"] = x0j;
    opts["solver"] = traj.meta.solver;
    opts["n_accepted"] = traj.meta.n_accepted;
    opts["n_rejected"] = traj.meta.n_rejected;
    opts["negative_excursions"] = traj.meta.negative_excursions;
    run.write_meta(opts);
}

// ---------------------------------------------------------------------------
// nullclines
// ---------------------------------------------------------------------------

struct NullclineOpts {
    double total_lo = -1;  // <0: derived from the parameters
    double total_hi = -1;
    int n_total = 400;
};

void cmd_nullclines(const CommonOpts& common, const NullclineOpts& o) {
    Run run(common, "nullclines");
    const Params& p = run.params;
    const double lo = o.total_lo >= 0 ? o.total_lo : 0.02 * p.K_c;
    const double hi = o.total_hi >= 0 ? o.total_hi : std::min(1.0 / p.A_cyto, 20.0 * p.K_c);
    if (!(lo < hi)) throw std::invalid_argument("nullclines: need total_lo < total_hi");

    const NullclineSet ncs = trace_nullclines(p, lo, hi, o.n_total);
    const auto dump = [](const std::vector<NullclinePolyline>& comps) {
        CsvWriter csv({"total", "frac", "which"});
        for (std::size_t c = 0; c < comps.size(); ++c)
            for (const auto& pt : comps[c].points)
                csv.add_row_raw({format_double(pt.total), format_double(pt.frac),
                                 std::to_string(c)});
        return csv.str();
    };
    run.write("_c_no.csv", dump(ncs.c_no));
    run.write("_c_nop.csv", dump(ncs.c_nop));

    CsvWriter eq_csv({"c_no", "c_nop", "kind", "re_lambda1", "im_lambda1", "re_lambda2",
                      "im_lambda2"});
    for (const auto& eq : find_equilibria(p))
        eq_csv.add_row_raw({format_double(eq.state[0]), format_double(eq.state[1]),
                            to_string(eq.kind), format_double(eq.lambda1.real()),
                            format_double(eq.lambda1.imag()), format_double(eq.lambda2.real()),
                            format_double(eq.lambda2.imag())});
    run.write("_equilibria.csv", eq_csv.str());

    json opts;
    opts["total_lo"] = lo;
    opts["total_hi"] = hi;
    opts["n_total"] = o.n_total;
    opts["max_roots_c_no"] = max_roots_per_total(ncs, 0);
    opts["max_roots_c_nop"] = max_roots_per_total(ncs, 1);
    run.write_meta(opts);
}

// ---------------------------------------------------------------------------
// diagram
// ---------------------------------------------------------------------------

struct DiagramOpts {
    std::string kind = "eq1d";
    std::string free_name = "K_c";
    double lo = 0.2, hi = 8.0;
    std::string p1 = "tau", p2 = "K_c";
    std::string scan;  // seed-Hopf scan parameter; default p2
    double scan_lo = 0.2, scan_hi = 8.0;
    double ds0 = 1e-2, ds_max = 1.0;
    int max_points = 4000;
};

json event_json(const BranchEvent& ev, const std::vector<std::string>& coord_names) {
    json j;
    j["kind"] = ev.kind;
    j["after_point"] = ev.after_point;
    for (std::size_t k = 0; k < coord_names.size(); ++k)
        j[coord_names[k]] = ev.u[static_cast<Eigen::Index>(k)];
    j["test_value"] = ev.test_value;
    return j;
}

json eq_branch_json(const Branch& b) {
    json j;
    j["columns"] = {"param", "c_no", "c_nop", "stable", "test_hopf", "test_fold"};
    json pts = json::array();
    for (const auto& bp : b.points) {
        const double h = bp.tests.size() > 0 ? bp.tests[0] : 0.0;
        const double f = bp.tests.size() > 1 ? bp.tests[1] : 0.0;
        pts.push_back({bp.u[2], bp.u[0], bp.u[1], bp.stable ? 1.0 : 0.0, h, f});
    }
    j["points"] = std::move(pts);
    json evs = json::array();
    for (const auto& ev : b.events) evs.push_back(event_json(ev, {"c_no", "c_nop", "param"}));
    j["events"] = std::move(evs);
    j["termination"] = b.termination;
    j["closed"] = b.closed;
    return j;
}

std::string eq_branch_csv(const Branch& b) {
    CsvWriter csv({"param", "c_no", "c_nop", "stable", "test_hopf", "test_fold"});
    for (const auto& bp : b.points)
        csv.add_row_raw({format_double(bp.u[2]), format_double(bp.u[0]), format_double(bp.u[1]),
                         bp.stable ? "1" : "0",
                         format_double(bp.tests.size() > 0 ? bp.tests[0] : 0.0),
                         format_double(bp.tests.size() > 1 ? bp.tests[1] : 0.0)});
    return csv.str();
}

json cycle_branch_json(const CycleBranch& cb) {
    json j;
    j["columns"] = {"param", "anchor_c_no", "anchor_c_nop", "T",
                    "mu",    "amplitude",   "c_no_min",     "c_no_max",
                    "stable"};
    json pts = json::array();
    for (const auto& cp : cb.points) {
        const auto& c = cp.cycle;
        pts.push_back({cp.param, c.anchor[0], c.anchor[1], c.T, c.mu, c.amplitude, c.c_no_min,
                       c.c_no_max, c.stable() ? 1.0 : 0.0});
    }
    j["points"] = std::move(pts);
    json evs = json::array();
    for (const auto& ev : cb.events)
        evs.push_back(event_json(ev, {"anchor_c_no", "anchor_c_nop", "T", "param"}));
    j["events"] = std::move(evs);
    j["termination"] = cb.termination;
    return j;
}

std::string cycle_branch_csv(const CycleBranch& cb) {
    CsvWriter csv({"param", "anchor_c_no", "anchor_c_nop", "T", "mu", "amplitude", "c_no_min",
                   "c_no_max", "stable"});
    for (const auto& cp : cb.points) {
        const auto& c = cp.cycle;
        csv.add_row_raw({format_double(cp.param), format_double(c.anchor[0]),
                         format_double(c.anchor[1]), format_double(c.T), format_double(c.mu),
                         format_double(c.amplitude), format_double(c.c_no_min),
                         format_double(c.c_no_max), c.stable() ? "1" : "0"});
    }
    return csv.str();
}

void cmd_diagram(const CommonOpts& common, const DiagramOpts& o) {
    Run run(common, "diagram");
    Params p = run.params;
    StepConfig cfg;
    cfg.ds0 = o.ds0;
    cfg.ds_max = o.ds_max;
    cfg.max_points = o.max_points;

    json opts;
    opts["kind"] = o.kind;
    opts["ds0"] = o.ds0;
    opts["ds_max"] = o.ds_max;
    opts["max_points"] = o.max_points;

    json doc;
    doc["kind"] = o.kind;
    doc["params"] = run.params_json();

    if (o.kind == "eq1d") {
        opts["free"] = o.free_name;
        opts["lo"] = o.lo;
        opts["hi"] = o.hi;
        const BifurcationDiagram d = diagram_1d(p, o.free_name, o.lo, o.hi, cfg);
        doc["free"] = d.free_name;
        json eqb = json::array();
        for (std::size_t i = 0; i < d.equilibria.size(); ++i) {
            eqb.push_back(eq_branch_json(d.equilibria[i]));
            run.write("_eq_branch_" + std::to_string(i) + ".csv", eq_branch_csv(d.equilibria[i]));
        }
        doc["equilibrium_branches"] = std::move(eqb);
        json cyb = json::array();
        for (std::size_t i = 0; i < d.cycles.size(); ++i) {
            cyb.push_back(cycle_branch_json(d.cycles[i]));
            run.write("_cycle_branch_" + std::to_string(i) + ".csv", cycle_branch_csv(d.cycles[i]));
        }
        doc["cycle_branches"] = std::move(cyb);
    } else if (o.kind == "hopf2d") {
        const std::string scan = o.scan.empty() ? o.p2 : o.scan;
        opts["p1"] = o.p1;
        opts["p2"] = o.p2;
        opts["scan"] = scan;
        opts["scan_lo"] = o.scan_lo;
        opts["scan_hi"] = o.scan_hi;
        const auto [x_hopf, p_hopf] = find_hopf(p, scan, o.scan_lo, o.scan_hi);
        *param_ptr(p, scan) = p_hopf;
        opts["seed_hopf"] = {{"param", scan}, {"value", p_hopf}};
        const HopfCurve hc = continue_hopf_curve(p, o.p1, o.p2, x_hopf, cfg);
        doc["p1"] = hc.p1;
        doc["p2"] = hc.p2;
        doc["columns"] = {"p1", "p2", "c_no", "c_nop", "l1", "det"};
        json pts = json::array();
        CsvWriter csv({"p1", "p2", "c_no", "c_nop", "l1", "det"});
        for (const auto& bp : hc.branch.points) {
            const double l1 = bp.tests.size() > 0 ? bp.tests[0] : 0.0;
            const double det = bp.tests.size() > 1 ? bp.tests[1] : 0.0;
            pts.push_back({bp.u[2], bp.u[3], bp.u[0], bp.u[1], l1, det});
            csv.add_row_raw({format_double(bp.u[2]), format_double(bp.u[3]),
                             format_double(bp.u[0]), format_double(bp.u[1]), format_double(l1),
                             format_double(det)});
        }
        doc["points"] = std::move(pts);
        json evs = json::array();
        for (const auto& ev : hc.branch.events)
            evs.push_back(event_json(ev, {"c_no", "c_nop", "p1", "p2"}));
        doc["events"] = std::move(evs);
        json c2 = json::array();
        for (const auto& b : hc.codim2)
            c2.push_back({{"kind", b.kind},
                          {"p1", b.p1},
                          {"p2", b.p2},
                          {"c_no", b.state[0]},
                          {"c_nop", b.state[1]},
                          {"l1", b.l1}});
        doc["codim2"] = std::move(c2);
        doc["termination"] = hc.branch.termination;
        doc["closed"] = hc.branch.closed;
        run.write("_hopf_curve.csv", csv.str());
    } else if (o.kind == "cyclefold2d") {
        const std::string scan = o.scan.empty() ? o.p2 : o.scan;
        if (scan != o.p1 && scan != o.p2)
            throw std::invalid_argument("--scan must name one of --p1/--p2 for cyclefold2d");
        opts["p1"] = o.p1;
        opts["p2"] = o.p2;
        opts["scan"] = scan;
        opts["scan_lo"] = o.scan_lo;
        opts["scan_hi"] = o.scan_hi;

        // Seed pipeline: subcritical Hopf -> small unstable cycle -> first
        // fold of cycles along the scan parameter.
        double lo = o.scan_lo;
        Vec2 x_hopf;
        double p_hopf = 0, l1 = 0;
        bool found = false;
        for (int attempt = 0; attempt < 3 && !found; ++attempt) {
            std::tie(x_hopf, p_hopf) = find_hopf(p, scan, lo, o.scan_hi);
            Params q = p;
            *param_ptr(q, scan) = p_hopf;
            l1 = first_lyapunov(x_hopf, q);
            if (l1 > 0) {
                found = true;
            } else {
                lo = p_hopf + 1e-3 * (o.scan_hi - o.scan_lo);
            }
        }
        if (!found)
            throw std::runtime_error("cyclefold2d: no subcritical Hopf (l1 > 0) on the scan "
                                     "range of '" + scan + "'");
        Params q = p;
        *param_ptr(q, scan) = p_hopf;
        opts["seed_hopf"] = {{"param", scan}, {"value", p_hopf}, {"l1", l1}};

        const double span = o.scan_hi - o.scan_lo;
        std::optional<CycleSolution> seed_fold;
        double fold_param = 0;
        for (const double dp : {-1e-3 * span, 1e-3 * span, -3e-3 * span, 3e-3 * span,
                                -1e-2 * span, 1e-2 * span}) {
            std::optional<CycleSolution> cyc;
            try {
                cyc = cycle_near_hopf(q, scan, p_hopf, x_hopf, dp);
            } catch (const std::exception&) {
                continue;
            }
            if (!cyc) continue;
            Params qc = q;
            *param_ptr(qc, scan) = p_hopf + dp;
            const CycleBranch cb = continue_cycle(qc, scan, o.scan_lo, o.scan_hi, *cyc, cfg);
            for (const auto& ev : cb.events) {
                if (ev.kind != "cycle-fold") continue;
                Params qf = q;
                *param_ptr(qf, scan) = ev.u[3];
                try {
                    seed_fold = refine_cycle(qf, Vec2(ev.u[0], ev.u[1]), ev.u[2]);
                    fold_param = ev.u[3];
                } catch (const std::exception&) {
                    continue;
                }
                break;
            }
            if (seed_fold) break;
        }
        if (!seed_fold)
            throw std::runtime_error(
                "cyclefold2d: no fold of cycles found along '" + scan +
                "' from the subcritical Hopf at " + format_double(p_hopf));
        *param_ptr(p, scan) = fold_param;
        opts["seed_fold"] = {{"param", scan}, {"value", fold_param}, {"mu", seed_fold->mu}};

        const CycleFoldCurve fc = continue_cycle_fold_curve(p, o.p1, o.p2, *seed_fold, cfg);
        doc["p1"] = fc.p1;
        doc["p2"] = fc.p2;
        doc["columns"] = {"p1", "p2", "anchor_c_no", "anchor_c_nop", "T", "amplitude"};
        json pts = json::array();
        CsvWriter csv({"p1", "p2", "anchor_c_no", "anchor_c_nop", "T", "amplitude"});
        for (std::size_t i = 0; i < fc.points.size(); ++i) {
            const auto& c = fc.cycles[i];
            pts.push_back({fc.points[i].first, fc.points[i].second, c.anchor[0], c.anchor[1],
                           c.T, c.amplitude});
            csv.add_row_raw({format_double(fc.points[i].first),
                             format_double(fc.points[i].second), format_double(c.anchor[0]),
                             format_double(c.anchor[1]), format_double(c.T),
                             format_double(c.amplitude)});
        }
        doc["points"] = std::move(pts);
        doc["termination"] = fc.termination;
        run.write("_cycle_fold_curve.csv", csv.str());
    } else {
        throw std::invalid_argument("--kind must be eq1d, hopf2d, or cyclefold2d");
    }

    run.write("_diagram.json", doc.dump(2) + "\n");
    run.write_meta(opts);
}

// ---------------------------------------------------------------------------
// regime-grid
// ---------------------------------------------------------------------------

struct GridOpts {
    std::string p1 = "K_c";
    double p1_lo = 0.5, p1_hi = 5.0;
    int p1_n = 10;
    bool p1_log = false;
    std::string p2 = "tau";
    double p2_lo = 0.01, p2_hi = 10.0;
    int p2_n = 10;
    bool p2_log = true;
    double t_transient = 300.0, t_observe = 200.0;
};

void cmd_regime_grid(const CommonOpts& common, const GridOpts& o) {
    Run run(common, "regime-grid");
    const Params& p = run.params;
    {
        Params probe = p;  // reject unknown names before spawning workers
        param_ptr(probe, o.p1);
        param_ptr(probe, o.p2);
    }
    const std::vector<double> v1 = spaced_values(o.p1_lo, o.p1_hi, o.p1_n, o.p1_log, "--p1");
    const std::vector<double> v2 = spaced_values(o.p2_lo, o.p2_hi, o.p2_n, o.p2_log, "--p2");

    const int n_cells = static_cast<int>(v1.size() * v2.size());
    std::vector<std::string> labels(static_cast<std::size_t>(n_cells));
    parallel_for(n_cells, common.jobs, [&](int idx) {
        const std::size_t i = static_cast<std::size_t>(idx) / v2.size();
        const std::size_t j = static_cast<std::size_t>(idx) % v2.size();
        Params q = p;
        *param_ptr(q, o.p1) = v1[i];
        *param_ptr(q, o.p2) = v2[j];
        const auto eqs = find_equilibria(q);
        const Regime r = classify_regime(q, default_probes(q, eqs), o.t_transient, o.t_observe);
        labels[static_cast<std::size_t>(idx)] = to_string(r);
    });

    CsvWriter csv({"p1", "p2", "label"});
    for (std::size_t i = 0; i < v1.size(); ++i)
        for (std::size_t j = 0; j < v2.size(); ++j)
            csv.add_row_raw({format_double(v1[i]), format_double(v2[j]),
                             labels[i * v2.size() + j]});
    run.write("_grid.csv", csv.str());

    json opts;
    opts["p1"] = o.p1;
    opts["p1_values"] = v1;
    opts["p2"] = o.p2;
    opts["p2_values"] = v2;
    opts["t_transient"] = o.t_transient;
    opts["t_observe"] = o.t_observe;
    run.write_meta(opts);
}

// ---------------------------------------------------------------------------
// sr
// ---------------------------------------------------------------------------

struct SrOpts {
    std::string sigmas = "0.0001,0.000316,0.001,0.00316,0.01,0.0316,0.1,0.316,1";
    double t_end = 400.0, dt = 1e-3, out_dt = 0.05, transient_frac = 0.2;
    int n_seeds = 10;
    std::string x0;
};

void cmd_sr(const CommonOpts& common, const SrOpts& o) {
    Run run(common, "sr");
    const Params& p = run.params;
    ResonanceConfig cfg;
    cfg.t_end = o.t_end;
    cfg.dt = o.dt;
    cfg.out_dt = o.out_dt;
    cfg.transient_frac = o.transient_frac;
    cfg.n_seeds = o.n_seeds;
    warn_sde_step(p, o.dt);

    std::optional<Vec2> x0;
    if (!o.x0.empty()) {
        const auto v = parse_double_list(o.x0, "--x0");
        if (v.size() != 2) throw std::invalid_argument("--x0 needs 2 values");
        x0 = Vec2(v[0], v[1]);
    }

    const ResonanceCurve curve =
        sr_sweep(p, parse_double_list(o.sigmas, "--sigmas"), cfg, common.seed, x0);

    CsvWriter csv({"sigma", "mean_amplitude", "stderr"});
    for (std::size_t i = 0; i < curve.sigmas.size(); ++i)
        csv.add_row({curve.sigmas[i], curve.mean_amplitudes[i], curve.stderrs[i]});
    run.write(".csv", csv.str());

    json opts;
    opts["sigmas"] = curve.sigmas;
    opts["t_end"] = cfg.t_end;
    opts["dt"] = cfg.dt;
    opts["out_dt"] = cfg.out_dt;
    opts["transient_frac"] = cfg.transient_frac;
    opts["n_seeds"] = cfg.n_seeds;
    opts["seed_amplitudes"] = curve.seed_amplitudes;
    run.write_meta(opts);
}

// ---------------------------------------------------------------------------
// periods
// ---------------------------------------------------------------------------

struct PeriodsOpts {
    std::string free_name = "K_c";
    std::string values;
    double lo = 1.4, hi = 3.8;
    int n = 7;
    double sigma = 0.01;
    double t_end = 2000.0, dt = 1e-3, out_dt = 0.05, transient_frac = 0.2;
    double up = 0.6, down = 0.4;
    int n_traj = 50;
};

void cmd_periods(const CommonOpts& common, const PeriodsOpts& o) {
    Run run(common, "periods");
    const Params& p = run.params;
    PeriodConfig cfg;
    cfg.t_end = o.t_end;
    cfg.dt = o.dt;
    cfg.out_dt = o.out_dt;
    cfg.transient_frac = o.transient_frac;
    cfg.up_threshold = o.up;
    cfg.down_threshold = o.down;
    cfg.n_traj = o.n_traj;
    warn_sde_step(p, o.dt);

    const std::vector<double> values = o.values.empty()
                                           ? spaced_values(o.lo, o.hi, o.n, false, "--lo/--hi")
                                           : parse_double_list(o.values, "--values");
    const auto points =
        cv_vs_parameter(p, o.free_name, values, o.sigma, cfg, common.seed, common.jobs);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    CsvWriter csv({"param", "mean_period", "cv", "n_periods"});
    json osc = json::array();
    for (const auto& pt : points) {
        csv.add_row_raw({format_double(pt.value),
                         format_double(pt.stats.oscillating ? pt.stats.mean_period : nan),
                         format_double(pt.stats.oscillating ? pt.stats.cv : nan),
                         std::to_string(pt.stats.n_periods)});
        osc.push_back(pt.stats.oscillating);
    }
    run.write(".csv", csv.str());

    json opts;
    opts["free"] = o.free_name;
    opts["values"] = values;
    opts["sigma"] = o.sigma;
    opts["t_end"] = cfg.t_end;
    opts["dt"] = cfg.dt;
    opts["out_dt"] = cfg.out_dt;
    opts["transient_frac"] = cfg.transient_frac;
    opts["up_threshold"] = cfg.up_threshold;
    opts["down_threshold"] = cfg.down_threshold;
    opts["n_traj"] = cfg.n_traj;
    opts["oscillating"] = osc;
    run.write_meta(opts);
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

struct CalibrateOpts {
    int n_total = 200;
};

void cmd_calibrate(const CommonOpts& common, const CalibrateOpts& o) {
    Run run(common, "calibrate");
    const Params& p = run.params;

    // Bistability scan: the quasi-steady phosphorylation relation must be
    // S-shaped (3 roots) on a band of totals.
    const double lo = 0.2 * p.K_c;
    const double hi = std::min(1.0 / p.A_cyto, 20.0 * p.K_c);
    int max_roots = 0;
    double band_lo = 0, band_hi = 0;
    for (int i = 0; i < o.n_total; ++i) {
        const double total = lo + (hi - lo) * i / (o.n_total - 1);
        const int k = static_cast<int>(quasi_steady_fractions(total, p).size());
        if (k > max_roots) max_roots = k;
        if (k >= 3) {
            if (band_lo == 0) band_lo = total;
            band_hi = total;
        }
    }
    const bool bistable = max_roots >= 3;

    // Limit-cycle check at the resolved parameter point.
    std::optional<CycleSolution> cyc;
    try {
        cyc = cycle_from_simulation(p);
    } catch (const std::exception&) {
        cyc.reset();
    }
    const bool oscillates = cyc.has_value() && cyc->amplitude > 1e-3;

    json report;
    report["qss_scan"] = {{"total_lo", lo},
                          {"total_hi", hi},
                          {"n_total", o.n_total},
                          {"max_roots", max_roots},
                          {"three_root_band", {band_lo, band_hi}}};
    if (cyc) {
        report["limit_cycle"] = {{"converged", true},
                                 {"T", cyc->T},
                                 {"amplitude", cyc->amplitude},
                                 {"mu", cyc->mu},
                                 {"anchor", {cyc->anchor[0], cyc->anchor[1]}}};
    } else {
        report["limit_cycle"] = {{"converged", false}};
    }
    report["ok"] = bistable && oscillates;
    run.write("_report.json", report.dump(2) + "\n");

    const fs::path cfg_path = fs::path(common.out_dir) / "default.cfg";
    atomic_write_file(cfg_path.string(), params_to_config(p));
    run.outputs.push_back("default.cfg");

    json opts;
    opts["n_total"] = o.n_total;
    opts["ok"] = bistable && oscillates;
    run.write_meta(opts);

    if (!(bistable && oscillates))
        throw std::runtime_error(
            std::string("calibrate: parameter point failed the scan (") +
            (bistable ? "" : "no 3-root quasi-steady band; ") +
            (oscillates ? "" : "no converged limit cycle") + ")");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical workbench for the bistable-phosphorylation / "
                 "nucleocytoplasmic-transport model"};
    app.set_version_flag("--version", "biphos 0.1.0");
    app.require_subcommand(1);

    std::function<void()> action;

    auto* sim = app.add_subcommand("simulate", "integrate one trajectory (ODE or SDE)");
    CommonOpts sim_c;
    SimulateOpts sim_o;
    add_common(sim, sim_c, "simulate");
    sim->add_option("--model", sim_o.model, "reduced | full");
    sim->add_option("--t-end", sim_o.t_end, "integration horizon");
    sim->add_option("--out-dt", sim_o.out_dt, "output sampling interval");
    sim->add_option("--rel-tol", sim_o.rel_tol, "deterministic relative tolerance");
    sim->add_option("--abs-tol", sim_o.abs_tol, "deterministic absolute tolerance");
    sim->add_option("--dt", sim_o.dt, "fixed stochastic step (sigma > 0)");
    sim->add_option("--x0", sim_o.x0, "initial state, comma-separated");
    sim->callback([&] { action = [&] { cmd_simulate(sim_c, sim_o); }; });

    auto* ncl = app.add_subcommand("nullclines", "phase-plane nullclines and equilibria");
    CommonOpts ncl_c;
    NullclineOpts ncl_o;
    add_common(ncl, ncl_c, "nullclines");
    ncl->add_option("--total-lo", ncl_o.total_lo, "lower total-concentration bound");
    ncl->add_option("--total-hi", ncl_o.total_hi, "upper total-concentration bound");
    ncl->add_option("--n", ncl_o.n_total, "grid columns")->check(CLI::PositiveNumber);
    ncl->callback([&] { action = [&] { cmd_nullclines(ncl_c, ncl_o); }; });

    auto* dia = app.add_subcommand("diagram", "bifurcation diagrams and codimension-2 curves");
    CommonOpts dia_c;
    DiagramOpts dia_o;
    add_common(dia, dia_c, "diagram");
    dia->add_option("--kind", dia_o.kind, "eq1d | hopf2d | cyclefold2d");
    dia->add_option("--free", dia_o.free_name, "free parameter (eq1d)");
    dia->add_option("--lo", dia_o.lo, "free-parameter lower bound (eq1d)");
    dia->add_option("--hi", dia_o.hi, "free-parameter upper bound (eq1d)");
    dia->add_option("--p1", dia_o.p1, "first parameter (hopf2d/cyclefold2d)");
    dia->add_option("--p2", dia_o.p2, "second parameter (hopf2d/cyclefold2d)");
    dia->add_option("--scan", dia_o.scan, "seed-scan parameter (default: --p2)");
    dia->add_option("--scan-lo", dia_o.scan_lo, "seed-scan lower bound");
    dia->add_option("--scan-hi", dia_o.scan_hi, "seed-scan upper bound");
    dia->add_option("--ds0", dia_o.ds0, "initial arclength step");
    dia->add_option("--ds-max", dia_o.ds_max, "arclength step cap");
    dia->add_option("--max-points", dia_o.max_points, "points per branch")
        ->check(CLI::PositiveNumber);
    dia->callback([&] { action = [&] { cmd_diagram(dia_c, dia_o); }; });

    auto* grd = app.add_subcommand("regime-grid", "long-run regime classification on a grid");
    CommonOpts grd_c;
    GridOpts grd_o;
    add_common(grd, grd_c, "regime");
    grd->add_option("--p1", grd_o.p1, "row parameter");
    grd->add_option("--p1-lo", grd_o.p1_lo, "row lower bound");
    grd->add_option("--p1-hi", grd_o.p1_hi, "row upper bound");
    grd->add_option("--p1-n", grd_o.p1_n, "row count")->check(CLI::PositiveNumber);
    grd->add_flag("--p1-log", grd_o.p1_log, "log-spaced rows");
    grd->add_option("--p2", grd_o.p2, "column parameter");
    grd->add_option("--p2-lo", grd_o.p2_lo, "column lower bound");
    grd->add_option("--p2-hi", grd_o.p2_hi, "column upper bound");
    grd->add_option("--p2-n", grd_o.p2_n, "column count")->check(CLI::PositiveNumber);
    grd->add_flag("--p2-log,!--p2-linear", grd_o.p2_log, "log-spaced columns (default)");
    grd->add_option("--t-transient", grd_o.t_transient, "discarded lead-in time");
    grd->add_option("--t-observe", grd_o.t_observe, "classification window");
    grd->callback([&] { action = [&] { cmd_regime_grid(grd_c, grd_o); }; });

    auto* sr = app.add_subcommand("sr", "stochastic-resonance noise sweep");
    CommonOpts sr_c;
    SrOpts sr_o;
    add_common(sr, sr_c, "sr");
    sr->add_option("--sigmas", sr_o.sigmas, "comma-separated noise amplitudes, increasing");
    sr->add_option("--t-end", sr_o.t_end, "horizon per trajectory");
    sr->add_option("--dt", sr_o.dt, "Euler-Maruyama step");
    sr->add_option("--out-dt", sr_o.out_dt, "sampling interval handed to the FFT");
    sr->add_option("--transient-frac", sr_o.transient_frac, "discarded fraction of t_end");
    sr->add_option("--n-seeds", sr_o.n_seeds, "trajectories per sigma")
        ->check(CLI::PositiveNumber);
    sr->add_option("--x0", sr_o.x0, "start state (default: stable equilibrium)");
    sr->callback([&] { action = [&] { cmd_sr(sr_c, sr_o); }; });

    auto* per = app.add_subcommand("periods", "period robustness vs a parameter");
    CommonOpts per_c;
    PeriodsOpts per_o;
    add_common(per, per_c, "periods");
    per->add_option("--free", per_o.free_name, "swept parameter");
    per->add_option("--values", per_o.values, "explicit comma-separated parameter values");
    per->add_option("--lo", per_o.lo, "sweep lower bound");
    per->add_option("--hi", per_o.hi, "sweep upper bound");
    per->add_option("--n", per_o.n, "sweep point count")->check(CLI::PositiveNumber);
    per->add_option("--sigma", per_o.sigma, "noise amplitude");
    per->add_option("--t-end", per_o.t_end, "horizon per trajectory");
    per->add_option("--dt", per_o.dt, "Euler-Maruyama step");
    per->add_option("--out-dt", per_o.out_dt, "sampling interval for event detection");
    per->add_option("--transient-frac", per_o.transient_frac, "discarded fraction of t_end");
    per->add_option("--up", per_o.up, "upper trigger threshold on the phosphorylated fraction");
    per->add_option("--down", per_o.down, "lower (re-arm) trigger threshold");
    per->add_option("--n-traj", per_o.n_traj, "trajectories per value")
        ->check(CLI::PositiveNumber);
    per->callback([&] { action = [&] { cmd_periods(per_c, per_o); }; });

    auto* cal = app.add_subcommand(
        "calibrate", "bistability scan + limit-cycle check; emits the default config");
    CommonOpts cal_c;
    CalibrateOpts cal_o;
    add_common(cal, cal_c, "calibrate");
    cal->add_option("--n", cal_o.n_total, "totals in the quasi-steady scan")
        ->check(CLI::PositiveNumber);
    cal->callback([&] { action = [&] { cmd_calibrate(cal_c, cal_o); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        action();
    } catch (const std::exception& e) {
        std::cerr << "biphos: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
