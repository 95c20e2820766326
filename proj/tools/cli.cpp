#include "cli.hpp"

#include "steklov/errors.hpp"
#include "steklov/experiments.hpp"
#include "steklov/io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

namespace steklov::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kModes{
    "optimize-convex",   "optimize-nonconvex",    "spectrum",      "experiment:slope",
    "experiment:bound",  "experiment:multiplicity", "benchmark-disk",
};

bool is_file_initial(const std::string& initial) { return initial.rfind("file:", 0) == 0; }

BoundaryPolyline disk_polyline(const RunConfig& cfg) {
    return reconstruct_boundary(SupportVector::constant(cfg.n_angles, 0.5 * cfg.diameter));
}

BoundaryPolyline initial_polyline(const RunConfig& cfg) {
    if (is_file_initial(cfg.initial)) return read_polyline_csv(fs::path(cfg.initial.substr(5)));
    return disk_polyline(cfg);
}

SupportVector support_of(const BoundaryPolyline& b, std::size_t n_angles) {
    return SupportVector::sample(n_angles, [&](double t) {
        const Vec2 u(std::cos(t), std::sin(t));
        double best = -std::numeric_limits<double>::infinity();
        for (const Vec2& v : b.vertices) best = std::max(best, v.dot(u));
        return best;
    });
}

template <class Writer>
std::string render(Writer&& w) {
    std::ostringstream os;
    w(os);
    return os.str();
}

void write_shape_files(const fs::path& dir, const Evaluation& ev) {
    write_text_file(dir / "shape.csv", render([&](std::ostream& os) { write_polyline_csv(os, ev.boundary); }));
    write_text_file(dir / "shape.svg", render([&](std::ostream& os) { write_svg(os, ev.boundary, &ev.diameter); }));
    write_text_file(dir / "spectrum.csv", render([&](std::ostream& os) { write_spectrum_csv(os, ev.spectrum); }));
    write_text_file(dir / "mesh.off", render([&](std::ostream& os) { write_off(os, ev.mesh); }));
}

json evaluation_json(const RunConfig& cfg, std::size_t k, const Evaluation& ev) {
    json r;
    r["config"] = cfg.to_json(k);
    r["objective"] = ev.objective;
    r["sigma_k"] = ev.sigma;
    r["eigenvalues"] = eigenvalues_json(ev.spectrum);
    r["diameter"] = ev.diameter.diameter;
    r["diameter_pairs"] = to_json(ev.diameter);
    r["area"] = ev.area;
    r["history"] = json::array();
    return r;
}

struct Run {
    const RunConfig& cfg;
    std::size_t k;
    fs::path dir;
    std::ostringstream out;
    std::ostringstream err;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    double mesh_h() const { return cfg.mesh_h_factor * cfg.diameter; }

    void finish(json& result, const std::vector<HistoryEntry>& history) {
        write_text_file(dir / "history.csv", render([&](std::ostream& os) { write_history_csv(os, history); }));
        result["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_text_file(dir / "result.json", result.dump(2) + "\n");
    }

    void report(const json& rep) { write_text_file(dir / "experiment.json", rep.dump(2) + "\n"); }

    OptimState optimize(bool convex) {
        OptimOptions opts = cfg.options(k);
        std::ostringstream log;
        if (cfg.verbose) opts.log = &log;
        OptimState st;
        if (is_file_initial(cfg.initial)) {
            const BoundaryPolyline b = initial_polyline(cfg);
            st = convex ? ascend(support_of(b, cfg.n_angles), opts)
                        : ascend_nonconvex(GraphPair::from_boundary(b, cfg.n_angles / 2, cfg.diameter), opts);
        } else {
            st = convex ? optimize_convex(opts) : optimize_nonconvex(opts);
        }
        err << log.str();

        json r = evaluation_json(cfg, k, st.best);
        if (convex) {
            const SupportVector sv = st.support(cfg.n_angles);
            r["support"] = std::vector<double>(sv.p.data(), sv.p.data() + sv.p.size());
        } else {
            const GraphPair g = st.graphs(cfg.diameter);
            r["graphs"] = {{"p", std::vector<double>(g.p.data(), g.p.data() + g.p.size())},
                           {"q", std::vector<double>(g.q.data(), g.q.data() + g.q.size())}};
        }
        json hist = json::array();
        for (const HistoryEntry& h : st.history) hist.push_back(to_json(h));
        r["history"] = hist;
        r["iterations"] = st.iterations;
        r["converged"] = st.converged;
        r["stop_reason"] = st.stop_reason;
        r["bound_held"] = st.bound_held;
        r["diameter_ok"] = st.diameter_ok;
        r["rejected_candidates"] = st.rejected_candidates;
        write_shape_files(dir, st.best);
        finish(r, st.history);
        out << "k=" << k << " objective=" << st.best.objective << " iterations=" << st.iterations << " ("
            << st.stop_reason << ")\n";
        return st;
    }

    int optimize_mode(bool convex) {
        const OptimState st = optimize(convex);
        if (!st.bound_held) err << "k=" << k << ": an iterate violated sigma_k <= 2(k+1)^3 |Omega| / D^3\n";
        if (!st.diameter_ok) err << "k=" << k << ": final diameter exceeds d (1 + 1e-3)\n";
        return st.bound_held && st.diameter_ok ? kExitOk : kExitCheckFailed;
    }

    Evaluation evaluate_initial(std::size_t m) {
        return evaluate(initial_polyline(cfg), k, m, mesh_h(), 2);
    }

    int spectrum_mode(bool disk_benchmark) {
        const std::size_t m = std::max<std::size_t>(k + 2, 8);
        const Evaluation ev = disk_benchmark ? evaluate(disk_polyline(cfg), k, m, mesh_h(), 2) : evaluate_initial(m);
        json r = evaluation_json(cfg, k, ev);
        int code = kExitOk;
        if (disk_benchmark) {
            // Disk of radius R: sigma = j / R for j = 1, 1, 2, 2, ...
            const double radius = 0.5 * cfg.diameter;
            json analytic = json::array(), errors = json::array();
            double worst = 0.0;
            for (std::size_t j = 1; j <= 8; ++j) {
                const double exact = static_cast<double>((j + 1) / 2) / radius;
                const double rel = std::abs(ev.spectrum.sigma(j) - exact) / exact;
                analytic.push_back(exact);
                errors.push_back(rel);
                worst = std::max(worst, rel);
            }
            const bool passed = worst < 5e-3;
            r["benchmark"] = {{"analytic", analytic}, {"relative_errors", errors},
                              {"max_relative_error", worst}, {"tolerance", 5e-3}, {"passed", passed}};
            out << "disk benchmark: max relative error " << worst << (passed ? " (pass)\n" : " (FAIL)\n");
            if (!passed) code = kExitCheckFailed;
        } else {
            out << "k=" << k << " sigma_k=" << ev.sigma << " objective=" << ev.objective << '\n';
        }
        write_shape_files(dir, ev);
        finish(r, {});
        return code;
    }

    int slope_mode() {
        PerturbationSpec spec;
        spec.n_angles = cfg.n_angles;
        spec.mesh_factor = cfg.mesh_h_factor;
        spec.radius = 0.5 * cfg.diameter;
        const SlopeReport rep = disk_perturbation_slope(spec);
        const bool passed = rep.measured > 0.0 && rep.relative_error < 0.1;
        json samples = json::array();
        for (const auto& [eps, v] : rep.samples) samples.push_back({eps, v});
        report({{"experiment", "slope"},
                {"inputs", {{"a2", spec.a2}, {"a4", spec.a4}, {"epsilons", spec.epsilons},
                            {"n_angles", spec.n_angles}, {"mesh_h_factor", spec.mesh_factor},
                            {"radius", spec.radius}}},
                {"measured", rep.measured},
                {"predicted", rep.predicted},
                {"relative_error", rep.relative_error},
                {"tolerance", 0.1},
                {"samples", samples},
                {"passed", passed}});
        write_text_file(dir / "slope.csv", render([&](std::ostream& os) {
                            os << "epsilon,objective\n" << std::setprecision(17);
                            for (const auto& [eps, v] : rep.samples) os << eps << ',' << v << '\n';
                        }));
        out << "slope: measured " << rep.measured << " predicted " << rep.predicted
            << (passed ? " (pass)\n" : " (FAIL)\n");
        return passed ? kExitOk : kExitCheckFailed;
    }

    int bound_mode() {
        const Evaluation ev = evaluate_initial(k + 2);
        const BoundCheck c = check_bound(ev.boundary, ev.spectrum, k);
        report({{"experiment", "bound"}, {"k", k}, {"sigma_k", c.sigma}, {"bound", c.bound},
                {"constant", derive_bound_constant(k).value}, {"area", ev.area},
                {"diameter", ev.diameter.diameter}, {"margin", c.margin}, {"passed", c.passed}});
        json r = evaluation_json(cfg, k, ev);
        write_shape_files(dir, ev);
        finish(r, {});
        out << "bound: sigma_k " << c.sigma << " <= " << c.bound << (c.passed ? " (pass)\n" : " (FAIL)\n");
        return c.passed ? kExitOk : kExitCheckFailed;
    }

    int multiplicity_mode() {
        Evaluation ev;
        if (is_file_initial(cfg.initial)) {
            ev = evaluate_initial(k + 2);
            json r = evaluation_json(cfg, k, ev);
            write_shape_files(dir, ev);
            finish(r, {});
        } else {
            ev = optimize(true).best;
        }
        const MultiplicityReport m = multiplicity_report(ev.spectrum, k);
        const bool passed = m.upper_gap < 0.02;
        report({{"experiment", "multiplicity"}, {"k", k}, {"sigma_k", m.sigma}, {"upper_gap", m.upper_gap},
                {"lower_gap", m.lower_gap}, {"tolerance", 0.02}, {"passed", passed}});
        out << "multiplicity: upper gap " << m.upper_gap << (passed ? " (pass)\n" : " (FAIL)\n");
        return passed ? kExitOk : kExitCheckFailed;
    }

    int execute() {
        const std::string& mode = cfg.mode;
        if (mode == "optimize-convex") return optimize_mode(true);
        if (mode == "optimize-nonconvex") return optimize_mode(false);
        if (mode == "spectrum") return spectrum_mode(false);
        if (mode == "benchmark-disk") return spectrum_mode(true);
        if (mode == "experiment:slope") return slope_mode();
        if (mode == "experiment:bound") return bound_mode();
        if (mode == "experiment:multiplicity") return multiplicity_mode();
        throw ConfigError("mode", "unknown mode '" + mode + "'");
    }
};

int run_guarded(Run& r) {
    try {
        std::error_code ec;
        fs::create_directories(r.dir, ec);
        if (ec) throw ConfigError("out_dir", "cannot create " + r.dir.string() + ": " + ec.message());
        return r.execute();
    } catch (const ConfigError& e) {
        r.err << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        r.err << "error: " << e.what() << '\n';
        return kExitSolverFailure;
    }
}

} // namespace

void RunConfig::validate() const {
    if (std::find(kModes.begin(), kModes.end(), mode) == kModes.end()) {
        throw ConfigError("mode", "unknown mode '" + mode + "'");
    }
    if (ks.empty()) throw ConfigError("k", "at least one value is required");
    for (std::size_t k : ks) {
        if (k < 1) throw ConfigError("k", "must be >= 1");
    }
    if (n_angles % 2 != 0 || n_angles < 8) {
        throw ConfigError("n_angles", std::to_string(n_angles) + " must be even and at least 8");
    }
    if (!(diameter > 0.0) || !std::isfinite(diameter)) throw ConfigError("diameter", "must be positive");
    if (!(mesh_h_factor > 0.0) || mesh_h_factor > 1.0) {
        throw ConfigError("mesh_h_factor", "must be in (0, 1]");
    }
    if (max_iters < 0) throw ConfigError("max_iters", "must be non-negative");
    if (!(tol > 0.0)) throw ConfigError("tol", "must be positive");
    if (restarts < 0) throw ConfigError("restarts", "must be non-negative");
    if (jobs < 1) throw ConfigError("jobs", "must be >= 1");
    if (initial != "disk" && !(is_file_initial(initial) && initial.size() > 5)) {
        throw ConfigError("initial", "expected 'disk' or 'file:<path>', got '" + initial + "'");
    }
    if (out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
}

OptimOptions RunConfig::options(std::size_t k) const {
    OptimOptions o;
    o.n_angles = n_angles;
    o.diameter = diameter;
    o.k = k;
    o.max_iters = max_iters;
    o.stop_tol = tol;
    o.mesh_factor = mesh_h_factor;
    o.restarts = restarts;
    o.seed = seed;
    return o;
}

json RunConfig::to_json(std::size_t k) const {
    return {{"mode", mode},         {"k", k},
            {"n_angles", n_angles}, {"diameter", diameter},
            {"mesh_h_factor", mesh_h_factor}, {"max_iters", max_iters},
            {"tol", tol},           {"seed", seed},
            {"restarts", restarts}, {"initial", initial}};
}

RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig cfg;
    CLI::App app{"Maximize Steklov eigenvalues under a diameter constraint"};
    app.set_config("--config", "", "File of 'key = value' lines ('#' comments)");
    app.allow_config_extras(false);
    app.add_option("--mode", cfg.mode, "optimize-convex | optimize-nonconvex | spectrum | experiment:slope | "
                                       "experiment:bound | experiment:multiplicity | benchmark-disk");
    app.add_option("--k", cfg.ks, "Eigenvalue index; a comma-separated list runs several")->delimiter(',');
    app.add_option("--n-angles,--n_angles", cfg.n_angles, "Number of support angles (even)");
    app.add_option("--diameter", cfg.diameter, "Diameter bound d");
    app.add_option("--mesh-h-factor,--mesh_h_factor", cfg.mesh_h_factor, "Mesh size as a fraction of d");
    app.add_option("--max-iters,--max_iters", cfg.max_iters, "Iteration limit per ascent");
    app.add_option("--tol", cfg.tol, "Relative objective change that stops the ascent");
    app.add_option("--seed", cfg.seed, "Seed of the restart perturbations");
    app.add_option("--restarts", cfg.restarts, "Random restarts besides the disk start");
    app.add_option("--initial", cfg.initial, "disk or file:<polyline.csv>");
    app.add_option("--out-dir,--out_dir", cfg.out_dir, "Output directory (default $STEKLOV_OUT_DIR)");
    app.add_option("--jobs", cfg.jobs, "Worker threads across k values");
    app.add_flag("--verbose,-v", cfg.verbose, "Per-iteration log on stderr");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw ConfigError("arguments", e.what());
    }
    if (cfg.out_dir.empty()) {
        const char* env = std::getenv("STEKLOV_OUT_DIR");
        cfg.out_dir = env && *env ? env : "steklov_out";
    }
    cfg.validate();
    return cfg;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<std::unique_ptr<Run>> runs;
    for (std::size_t k : cfg.ks) {
        const fs::path dir = cfg.ks.size() > 1 ? fs::path(cfg.out_dir) / ("k" + std::to_string(k)) : fs::path(cfg.out_dir);
        runs.push_back(std::make_unique<Run>(Run{cfg, k, dir, {}, {}}));
    }
    std::vector<int> codes(runs.size(), kExitOk);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) codes[i] = run_guarded(*runs[i]);
    };
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), runs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& r : runs) {
        out << r->out.str();
        err << r->err.str();
    }
    return *std::max_element(codes.begin(), codes.end());
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const HelpRequested& h) {
        std::cout << h.text;
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return run(cfg, std::cout, std::cerr);
}

} // namespace steklov::cli
