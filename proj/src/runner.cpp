#include "rabidimer/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "rabidimer/bath.hpp"
#include "rabidimer/ed.hpp"
#include "rabidimer/integrator.hpp"
#include "rabidimer/output.hpp"

namespace rabidimer {

void apply_preset(const std::string& name, ModelParams& p, IntegratorConfig& ic) {
    p.delta = 1.0;
    p.omega0 = 1.0;
    p.multiplicity = 6;
    if (name == "case1") {
        p.j_tunnel = 0.01;
        p.g = 0.01;
    } else if (name == "case2") {
        p.j_tunnel = 0.02;
        p.g = 0.3;
    } else if (name == "case3") {
        p.j_tunnel = 0.05;
        p.g = 0.3;
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    ic.t_end = 3.0 / p.j_tunnel;  // horizon t * J = 3
}

namespace {

struct CliValues {
    std::string preset, config, alpha_sweep, out;
    double alpha = 0.0, n_photon = 20.0, t_end = 1.0, rel_tol = 1e-8;
    int multiplicity = 1, n_bath = 60, jobs = 1;
    std::uint64_t seed = 1;
    bool validate = false, diagnostics = false;
};

void build_app(CLI::App& app, CliValues& v) {
    app.add_option("--preset", v.preset,
                   "operating point: case1 (J=g=0.01), case2 (J=0.02, g=0.3) or "
                   "case3 (J=0.05, g=0.3); sets the horizon to t*J = 3 and six branches");
    app.add_option("--config", v.config,
                   "key=value file applied after the preset, before explicit flags");
    app.add_option("--alpha", v.alpha, "bath coupling strength alpha");
    app.add_option("--alpha-sweep", v.alpha_sweep,
                   "comma-separated alpha values; one output directory per value");
    app.add_option("--multiplicity", v.multiplicity, "number of variational branches");
    app.add_option("--n-bath", v.n_bath, "number of discretized bath modes");
    app.add_option("--n-photon", v.n_photon, "initial left-resonator photon number");
    app.add_option("--t-end", v.t_end, "end time in units of 1/omega0");
    app.add_option("--rel-tol", v.rel_tol, "integrator relative tolerance");
    app.add_option("--out", v.out, "output directory; each run gets a subdirectory");
    app.add_option("--seed", v.seed, "seed for the branch displacement noise");
    app.add_flag("--validate", v.validate,
                 "run the built-in analytic/exact comparison suite and exit");
    app.add_flag("--diagnostics", v.diagnostics,
                 "write per-step solver diagnostics next to the series");
    app.add_option("--jobs", v.jobs, "maximum concurrent runs in a sweep");
}

std::vector<double> parse_alpha_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        size_t pos = 0;
        const double a = std::stod(cell, &pos);
        if (pos != cell.size() || !(a >= 0.0))
            throw std::invalid_argument("bad alpha value '" + cell + "'");
        out.push_back(a);
    }
    if (out.empty()) throw std::invalid_argument("empty --alpha-sweep list");
    return out;
}

std::string format_alpha(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", a);
    return buf;
}

}  // namespace

std::string usage_text() {
    CLI::App app{"Dissipative Rabi dimer: variational coherent-branch dynamics"};
    CliValues v;
    build_app(app, v);
    return app.help();
}

ParseResult parse_args(const std::vector<std::string>& args) {
    CLI::App app{"Dissipative Rabi dimer: variational coherent-branch dynamics"};
    CliValues v;
    build_app(app, v);
    if (args.empty()) return {std::nullopt, 2, app.help()};

    std::vector<const char*> argv{"rabi_dimer"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        return {std::nullopt, 0, app.help()};
    } catch (const CLI::ParseError& e) {
        return {std::nullopt, 2, std::string(e.what())};
    }

    RunSpec spec;
    try {
        if (app.count("--preset")) apply_preset(v.preset, spec.params, spec.integ);
        spec.preset = v.preset;
        if (app.count("--config")) load_config_file(v.config, spec.params, spec.integ);
        if (app.count("--alpha")) spec.params.alpha = v.alpha;
        if (app.count("--multiplicity")) spec.params.multiplicity = v.multiplicity;
        if (app.count("--n-bath")) spec.params.n_bath = v.n_bath;
        if (app.count("--n-photon")) spec.params.n_photon_init = v.n_photon;
        if (app.count("--t-end")) spec.integ.t_end = v.t_end;
        if (app.count("--rel-tol")) spec.integ.rel_tol = v.rel_tol;
        if (app.count("--out")) spec.out_dir = v.out;
        if (app.count("--jobs")) spec.jobs = std::max(1, v.jobs);
        spec.seed = v.seed;
        spec.validate = v.validate;
        spec.diagnostics = v.diagnostics;
        spec.alphas = app.count("--alpha-sweep") ? parse_alpha_list(v.alpha_sweep)
                                                 : std::vector<double>{spec.params.alpha};
        spec.params.validate();
        spec.integ.validate();
    } catch (const std::exception& e) {
        return {std::nullopt, 2, std::string(e.what())};
    }
    return {spec, 0, ""};
}

namespace {

int run_one(const RunSpec& spec, double alpha) {
    namespace fs = std::filesystem;
    ModelParams p = spec.params;
    p.alpha = alpha;
    const std::string run_id =
        (spec.preset.empty() ? std::string("run") : spec.preset) + "_alpha" +
        format_alpha(alpha);
    const fs::path dir = spec.out_dir / run_id;
    fs::create_directories(dir);

    RunOptions opts;
    opts.collect_diagnostics = spec.diagnostics;
    opts.checkpoint_dir = dir;
    const RunResult rr = run(p, spec.integ, spec.seed, opts);

    const BathDiscretization bath = discretize_bath(p);
    write_series(dir / "series.csv", rr.records);
    write_bath_map(dir / "bath.csv", rr.bath_frames, bath.omega);
    RunMetadata meta{spec.preset, p, spec.integ, spec.seed, rr.accepted_steps,
                     rr.rejected_steps};
    write_metadata(dir / "meta.json", meta, bath);
    if (spec.diagnostics) write_diagnostics(dir / "diagnostics.csv", rr.diagnostics);
    std::cout << run_id << ": " << rr.accepted_steps << " steps ("
              << rr.rejected_steps << " rejected), " << rr.records.size()
              << " samples -> " << dir.string() << '\n';
    return 0;
}

// ---- validation suite -----------------------------------------------------

void append_rows(ComparisonReport& into, const ComparisonReport& from,
                 const std::string& prefix) {
    for (auto row : from.rows) {
        row.observable = prefix + row.observable;
        into.rows.push_back(row);
        into.all_pass = into.all_pass && row.pass;
    }
}

// g = 0, no bath: the two resonators exchange photons like a beam splitter,
// Z(t) = N(0) cos(2 J t).
ComparisonReport check_beam_splitter(std::uint64_t seed) {
    ModelParams p;
    p.g = 0.0;
    p.j_tunnel = 0.01;
    p.alpha = 0.0;
    p.n_bath = 0;
    p.n_photon_init = 20.0;
    p.multiplicity = 1;
    IntegratorConfig ic;
    ic.t_end = std::numbers::pi / p.j_tunnel;  // one full exchange period
    ic.sample_interval = 0.5;
    const RunResult rr = run(p, ic, seed);
    ComparisonRow row{"z_vs_cos", 0.0, 0.0, 1e-5, true};
    for (const auto& r : rr.records) {
        const double dev =
            std::abs(r.z - p.n_photon_init * std::cos(2.0 * p.j_tunnel * r.t));
        if (dev > row.max_abs_dev) {
            row.max_abs_dev = dev;
            row.t_worst = r.t;
        }
    }
    row.pass = row.max_abs_dev <= row.tolerance;
    return {{row}, row.pass};
}

// g = 0 with both qubits down: each bath mode is an independently driven
// oscillator with drive -2 phi_k (from sz_L + sz_R = -2), giving
// N_k(t) = (8 phi_k^2 / omega_k^2) (1 - cos omega_k t).
ComparisonReport check_displaced_bath(std::uint64_t seed) {
    ModelParams p;
    p.g = 0.0;
    p.j_tunnel = 0.01;
    p.alpha = 0.1;
    p.n_bath = 60;
    p.n_photon_init = 20.0;
    p.multiplicity = 1;
    IntegratorConfig ic;
    ic.t_end = 5.0;
    ic.sample_interval = 0.5;
    const BathDiscretization bath = discretize_bath(p);
    const RunResult rr = run(p, ic, seed);
    ComparisonRow row{"bath_populations", 0.0, 0.0, 1e-6, true};
    for (const auto& f : rr.bath_frames) {
        for (int k = 0; k < bath.size(); ++k) {
            const double w = bath.omega[k], phi = bath.phi[k];
            const double exact =
                8.0 * phi * phi / (w * w) * (1.0 - std::cos(w * f.t));
            const double dev = std::abs(f.populations(k) - exact);
            if (dev > row.max_abs_dev) {
                row.max_abs_dev = dev;
                row.t_worst = f.t;
            }
        }
    }
    row.pass = row.max_abs_dev <= row.tolerance;
    return {{row}, row.pass};
}

ComparisonReport check_exact_propagation(std::uint64_t seed) {
    ModelParams p;
    p.j_tunnel = 0.01;
    p.g = 0.01;
    p.alpha = 0.0;
    p.n_bath = 0;
    p.n_photon_init = 2.0;
    p.multiplicity = 2;
    IntegratorConfig ic;
    ic.t_end = 50.0;  // t * J = 0.5
    ic.sample_interval = 0.5;
    const RunResult rr = run(p, ic, seed);

    TruncatedBasis basis{14, 14, 0, {}};
    const auto h = build_hamiltonian(p, BathDiscretization{}, basis);
    const auto psi0 = coherent_product_state(
        basis, 3, std::sqrt(p.n_photon_init), 0.0, Eigen::VectorXcd(0));
    std::vector<double> times;
    for (const auto& r : rr.records) times.push_back(r.t);
    double leak = 0.0;
    const auto ed = propagate_sampled(h, psi0, basis, times, &leak);
    auto rep = compare_observables(rr.records, ed, {"z", "sz_left", "sz_right"},
                                   0.05 * p.n_photon_init);
    ComparisonRow leak_row{"basis_leakage", 0.0, leak, 1e-6, leak <= 1e-6};
    rep.rows.push_back(leak_row);
    rep.all_pass = rep.all_pass && leak_row.pass;
    return rep;
}

int run_validation_suite(const RunSpec& spec) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.out_dir);
    ComparisonReport report;
    append_rows(report, check_beam_splitter(spec.seed), "beam_splitter:");
    append_rows(report, check_displaced_bath(spec.seed), "displaced_bath:");
    append_rows(report, check_exact_propagation(spec.seed), "exact_propagation:");
    write_comparison_csv(spec.out_dir / "validation_report.csv", report);
    for (const auto& row : report.rows)
        std::cout << (row.pass ? "PASS " : "FAIL ") << row.observable
                  << "  max_dev=" << row.max_abs_dev << "  tol=" << row.tolerance
                  << '\n';
    std::cout << (report.all_pass ? "validation suite: PASS" : "validation suite: FAIL")
              << '\n';
    return report.all_pass ? 0 : 1;
}

}  // namespace

int execute(const RunSpec& spec) {
    try {
        spec.params.validate();
        spec.integ.validate();
        if (spec.validate) return run_validation_suite(spec);

        std::filesystem::create_directories(spec.out_dir);
        // probe writability before any long computation
        const auto probe = spec.out_dir / ".write_probe";
        {
            std::ofstream f(probe);
            if (!f) throw std::runtime_error("output directory not writable: " +
                                             spec.out_dir.string());
        }
        std::filesystem::remove(probe);

        std::atomic<int> rc{0};
        const int jobs = std::max(1, spec.jobs);
        for (size_t i = 0; i < spec.alphas.size(); i += jobs) {
            std::vector<std::future<void>> wave;
            for (size_t j = i; j < std::min(spec.alphas.size(), i + jobs); ++j) {
                const double a = spec.alphas[j];
                wave.push_back(std::async(std::launch::async, [&spec, a, &rc]() {
                    try {
                        run_one(spec, a);
                    } catch (const std::exception& e) {
                        std::cerr << "run alpha=" << a << " failed: " << e.what() << '\n';
                        rc.store(1);
                    }
                }));
            }
            for (auto& f : wave) f.wait();
        }
        return rc.load();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace rabidimer
