#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "rabidimer/bath.hpp"
#include "rabidimer/params.hpp"
#include "rabidimer/state.hpp"

namespace rabidimer {

// Linearly-parameterized tangent frame for one branch: the four bare qubit
// amplitudes plus one rescaled direction per bosonic mode (the mode's
// creation operator acting on the branch).  In this frame the Gram matrix
// and right-hand side contain only ratios of coherent-state overlaps, so
// nothing under- or overflows for large displacements, and the Gram is
// Hermitian positive semi-definite by construction.
struct EomSystem {
    Eigen::MatrixXcd gram;  // P x P, P = branches * (4 + modes)
    Eigen::VectorXcd rhs;   // -i <T_beta|H|D>
    // Snapshot of the parameters the system was assembled from; needed to
    // convert the frame velocity back to plain parameter derivatives.
    Eigen::MatrixXcd amps;  // M x 4
    Eigen::MatrixXcd disp;  // M x modes, columns mu, nu, eta_0..
    int branches = 0;
    int bath_modes = 0;
    int size() const { return static_cast<int>(gram.rows()); }
};

// Flat index <-> (branch, slot).  Slots 0..3 are qubit amplitudes, 4 is the
// left-photon displacement, 5 the right-photon one, 6+k bath mode k.
struct ParamIndex {
    int branch;
    int slot;
};
ParamIndex param_of_index(int flat, int branches, int bath_modes);
int index_of_param(ParamIndex idx, int branches, int bath_modes);

struct EomSolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EomSolution {
    Eigen::VectorXcd deriv;  // physical time derivatives, pack_state layout
    double residual;         // relative residual of the regularized solve
    double shift;            // Tikhonov shift actually applied
    double cond_estimate;    // crude spread of the LDLT diagonal
};

void assemble(const VariationalState& st, const OverlapCache& cache,
              const ModelParams& p, const BathDiscretization& bath,
              EomSystem& out);
EomSystem assemble(const VariationalState& st, const OverlapCache& cache,
                   const ModelParams& p, const BathDiscretization& bath);

// Solves gram * v = rhs with a Tikhonov shift eps * trace(gram)/P, eps
// escalating from 1e-12 by factors of 10 up to 1e-8 while the relative
// residual exceeds 1e-6; throws EomSolveError if it still does.  The
// returned derivatives are already converted from the tangent-frame
// velocity to plain d/dt of the stored parameters.
EomSolution solve(const EomSystem& sys);

// Inverse of the post-solve conversion: maps physical derivatives back to
// the tangent-frame velocity v with gram * v = rhs.  Test hook.
Eigen::VectorXcd tangent_velocity(const EomSystem& sys,
                                  const Eigen::VectorXcd& deriv);

// d<D|D>/dt and d<H>/dt implied by a set of physical derivatives; both
// vanish on the exact flow.
double norm_rate(const EomSystem& sys, const Eigen::VectorXcd& deriv);
double energy_rate(const EomSystem& sys, const Eigen::VectorXcd& deriv);

}  // namespace rabidimer
