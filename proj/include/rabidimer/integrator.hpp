#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "rabidimer/bath.hpp"
#include "rabidimer/eom.hpp"
#include "rabidimer/params.hpp"
#include "rabidimer/state.hpp"

namespace rabidimer {

struct TimeSeriesRecord {
    double t, t_j;               // time, time in tunneling units t * J
    double n_left, n_right;      // resonator photon numbers
    double z, z_norm;            // imbalance, normalized imbalance
    double sz_left, sz_right;    // qubit polarizations
    double norm, energy;         // conserved quantities
};

struct BathFrame {
    double t;
    Eigen::VectorXd populations;
};

struct DiagnosticsRow {
    double t, dt, cond_estimate, shift, residual;
};

struct StepOutcome {
    bool accepted = false;
    double err = 0.0;         // local error estimate / tolerance (accept <= 1)
    double norm_drift = 0.0;  // |<D|D>_new - <D|D>_old|
    double dt_used = 0.0;
    DiagnosticsRow diag{};    // from the solve at the step's start
};

struct IntegrationStallError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Embedded Dormand-Prince 5(4) on the flattened parameter vector.  The local
// error is measured as the norm of the state perturbation the parameter error
// induces (through the variational Gram metric), so redundant directions of
// the overcomplete ansatz — nascent branches with negligible amplitude weight
// whose displacements are barely determined — do not throttle the step size.
// A step is accepted only if that error is within abs_tol + rel_tol and the
// squared norm moved by less than 1e-8; rejected attempts halve dt.  The last
// derivative of an accepted step seeds the next one (first-same-as-last).
class Dopri5Stepper {
  public:
    Dopri5Stepper(const ModelParams& p, const BathDiscretization& bath,
                  const IntegratorConfig& cfg);

    // One attempt with the given dt; advances st in place when accepted.
    // pre: |<D|D>| within 1e-6 of 1.
    StepOutcome step(VariationalState& st, double dt);

    // Invalidate cached derivatives after st was modified externally.
    void reset();

  private:
    struct Eval {
        Eigen::VectorXcd f;
        DiagnosticsRow diag;
    };
    Eval eval(const VariationalState& st, const OverlapCache& cache);

    const ModelParams params_;
    const BathDiscretization bath_;
    const IntegratorConfig cfg_;
    EomSystem sys_;
    bool have_first_ = false;
    Eigen::VectorXcd k_[7];
    double norm_cached_ = 1.0;
    DiagnosticsRow diag_cached_{};
};

struct RunOptions {
    bool collect_diagnostics = false;
    std::filesystem::path checkpoint_dir;  // empty: no checkpoints
};

struct RunResult {
    std::vector<TimeSeriesRecord> records;
    std::vector<BathFrame> bath_frames;
    std::vector<DiagnosticsRow> diagnostics;
    long accepted_steps = 0;
    long rejected_steps = 0;
};

// Full trajectory from the standard initial state: records at t = 0, every
// sample interval, and exactly at t_end (steps are clipped to the sample
// grid).  Checkpoints every 1000 accepted steps when a directory is given.
// Throws IntegrationStallError if dt falls below 1e-10.
RunResult run(const ModelParams& p, const IntegratorConfig& cfg, std::uint64_t seed,
              const RunOptions& opts = {});

// Same, but with a caller-supplied bath discretization instead of the
// standard spectral-density binning; bath.size() must equal p.n_bath.
RunResult run(const ModelParams& p, const IntegratorConfig& cfg, std::uint64_t seed,
              const BathDiscretization& bath, const RunOptions& opts);

}  // namespace rabidimer
