#include "rabidimer/integrator.hpp"

#include <cmath>
#include <fstream>

namespace rabidimer {

namespace {

constexpr double kNormDriftGate = 1e-8;
constexpr double kDtFloor = 1e-10;
constexpr int kCheckpointEvery = 1000;

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat: weights of the embedded 4th-order error estimate.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// Norm of the state perturbation a parameter error e induces:
// ||sum_i e_i dD/dy_i|| = sqrt(w^dag G w) with w the frame coordinates of e.
// Measuring the local error in this metric instead of component-wise makes
// the step controller blind to parameter jitter along near-null Gram
// directions (displacements of branches with negligible amplitude weight are
// barely determined and may move fast without moving the state), which would
// otherwise stall the integrator during branch activation.
double metric_error(const EomSystem& sys, const Eigen::VectorXcd& e) {
    const Eigen::VectorXcd w = tangent_velocity(sys, e);
    const double sq = w.dot(sys.gram.selfadjointView<Eigen::Lower>() * w).real();
    return std::sqrt(std::max(0.0, sq));
}

}  // namespace

Dopri5Stepper::Dopri5Stepper(const ModelParams& p, const BathDiscretization& bath,
                             const IntegratorConfig& cfg)
    : params_(p), bath_(bath), cfg_(cfg) {
    p.validate();
    cfg.validate();
}

Dopri5Stepper::Eval Dopri5Stepper::eval(const VariationalState& st,
                                        const OverlapCache& cache) {
    assemble(st, cache, params_, bath_, sys_);
    const EomSolution sol = solve(sys_);
    return {sol.deriv,
            {st.t, 0.0, sol.cond_estimate, sol.shift, sol.residual}};
}

void Dopri5Stepper::reset() { have_first_ = false; }

StepOutcome Dopri5Stepper::step(VariationalState& st, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("step: dt must be > 0");
    const int m = st.branches(), nb = st.bath_modes();
    const Eigen::VectorXcd y0 = pack_state(st);

    if (!have_first_) {
        const OverlapCache cache = overlap(st);
        norm_cached_ = state_norm(st, cache);
        if (std::abs(norm_cached_ - 1.0) > 1e-6)
            throw std::invalid_argument("step: state norm deviates from 1 by > 1e-6");
        const Eval ev = eval(st, cache);
        k_[0] = ev.f;
        diag_cached_ = ev.diag;
        have_first_ = true;
    }

    auto stage = [&](const Eigen::VectorXcd& y, double t) {
        VariationalState s = unpack_state(y, m, nb, t);
        return eval(s, overlap(s)).f;
    };
    const double t0 = st.t;
    k_[1] = stage(y0 + dt * (a21 * k_[0]), t0 + dt / 5);
    k_[2] = stage(y0 + dt * (a31 * k_[0] + a32 * k_[1]), t0 + 3 * dt / 10);
    k_[3] = stage(y0 + dt * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]),
                  t0 + 4 * dt / 5);
    k_[4] = stage(y0 + dt * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]),
                  t0 + 8 * dt / 9);
    k_[5] = stage(y0 + dt * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] +
                             a64 * k_[3] + a65 * k_[4]),
                  t0 + dt);
    const Eigen::VectorXcd y1 =
        y0 + dt * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);

    VariationalState st1 = unpack_state(y1, m, nb, t0 + dt);
    const OverlapCache cache1 = overlap(st1);
    const Eval ev7 = eval(st1, cache1);  // also the FSAL slot of the next step
    const Eigen::VectorXcd err_vec =
        dt * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] +
              e7 * ev7.f);

    StepOutcome out;
    out.dt_used = dt;
    const double norm1 = state_norm(st1, cache1);
    // sys_ still holds the system assembled at st1 by the eval above.
    out.err = metric_error(sys_, err_vec) / (cfg_.abs_tol + cfg_.rel_tol * norm1);
    out.norm_drift = std::abs(norm1 - norm_cached_);
    out.diag = diag_cached_;
    out.diag.dt = dt;
    out.accepted = out.err <= 1.0 && out.norm_drift <= kNormDriftGate;
    if (out.accepted) {
        st = std::move(st1);
        k_[0] = ev7.f;
        diag_cached_ = ev7.diag;
        norm_cached_ = norm1;
    }
    return out;
}

namespace {

void write_checkpoint(const std::filesystem::path& dir, const VariationalState& st) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "checkpoint.json");
    out << state_to_json(st) << '\n';
}

}  // namespace

RunResult run(const ModelParams& p, const IntegratorConfig& cfg, std::uint64_t seed,
              const RunOptions& opts) {
    return run(p, cfg, seed, discretize_bath(p), opts);
}

RunResult run(const ModelParams& p, const IntegratorConfig& cfg, std::uint64_t seed,
              const BathDiscretization& bath, const RunOptions& opts) {
    p.validate();
    cfg.validate();
    if (bath.size() != p.n_bath)
        throw std::invalid_argument("run: bath size does not match n_bath");
    VariationalState st = init_state(p, seed);
    OverlapCache cache = overlap(st);

    RunResult res;
    auto emit = [&](const VariationalState& s, const OverlapCache& c) {
        const PhotonNumbers n = photon_numbers(s, c);
        const Imbalance imb = photon_imbalance(n);
        const QubitPolarization q = qubit_polarization(s, c);
        res.records.push_back({s.t, s.t * p.j_tunnel, n.n_left, n.n_right, imb.z,
                               imb.z_norm, q.sz_left, q.sz_right, state_norm(s, c),
                               energy_expectation(s, c, p, bath)});
        res.bath_frames.push_back({s.t, bath_populations(s, c)});
    };
    emit(st, cache);
    if (cfg.t_end == 0.0) return res;

    Dopri5Stepper stepper(p, bath, cfg);
    const double ds = cfg.effective_sample_interval();
    long sample_k = 1;
    double next_sample = std::min(sample_k * ds, cfg.t_end);
    double dt_prop = std::min(cfg.dt_init, cfg.dt_max);

    while (st.t < cfg.t_end - 1e-12) {
        const double gap = next_sample - st.t;
        const bool clipped = gap < dt_prop;
        const double dt_eff = clipped ? gap : dt_prop;
        if (dt_eff < kDtFloor) {
            write_checkpoint(opts.checkpoint_dir, st);
            throw IntegrationStallError(
                "integration stalled at t = " + std::to_string(st.t) +
                ": dt fell below 1e-10 (checkpoint written)");
        }
        const StepOutcome out = stepper.step(st, dt_eff);
        if (!out.accepted) {
            ++res.rejected_steps;
            dt_prop = dt_eff / 2;
            continue;
        }
        ++res.accepted_steps;
        if (opts.collect_diagnostics) res.diagnostics.push_back(out.diag);
        if (std::abs(st.t - next_sample) <= 1e-12) {
            st.t = next_sample;
            cache = overlap(st);
            emit(st, cache);
            ++sample_k;
            next_sample = std::min(sample_k * ds, cfg.t_end);
        }
        if (!opts.checkpoint_dir.empty() &&
            res.accepted_steps % kCheckpointEvery == 0)
            write_checkpoint(opts.checkpoint_dir, st);
        const double fac =
            out.err == 0.0 ? 5.0
                           : std::min(5.0, std::max(0.2, 0.9 * std::pow(out.err, -0.2)));
        const double candidate = std::min(cfg.dt_max, dt_eff * fac);
        dt_prop = clipped ? std::min(cfg.dt_max, std::max(dt_prop, candidate))
                          : candidate;
    }
    return res;
}

}  // namespace rabidimer
