#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>

#include "rabidimer/bath.hpp"
#include "rabidimer/params.hpp"

namespace rabidimer {

using cplx = std::complex<double>;

// Multi-branch coherent-product ansatz.  Each branch carries four qubit
// amplitudes (ordering: up-up, up-down, down-up, down-down) and a coherent
// displacement per bosonic mode (left photon, right photon, n_bath bath
// modes).  No global normalization factor is stored: amplitudes are the
// bare expansion coefficients.
struct VariationalState {
    double t = 0.0;
    Eigen::MatrixXcd amps;  // M x 4
    Eigen::VectorXcd mu;    // M, left resonator
    Eigen::VectorXcd nu;    // M, right resonator
    Eigen::MatrixXcd eta;   // M x n_bath

    int branches() const { return static_cast<int>(amps.rows()); }
    int bath_modes() const { return static_cast<int>(eta.cols()); }
    int modes() const { return 2 + bath_modes(); }          // per branch
    int dof() const { return branches() * (4 + modes()); }  // complex dof
};

// Pairwise coherent-state overlaps S_ln = <branch l | branch n> (bosonic
// factors only), kept per sector so EOM assembly can reuse them.  Hermitian;
// unit diagonal by construction; |S_ln| <= 1 guaranteed because the real
// part of every exponent is computed as -|z_l - z_n|^2 / 2.
struct OverlapCache {
    Eigen::MatrixXcd s_left, s_right, s_bath, s;  // M x M each
};

// Branch 1 holds the product state |down,down> |sqrt(N0)>_L |0>_R |vac>_B
// with unit amplitude; remaining branches start amplitude-free with complex
// Gaussian displacement noise (std 0.1, see state.cpp) so the linear solve
// can activate them.  Deterministic in (params, seed).
VariationalState init_state(const ModelParams& p, std::uint64_t seed);

OverlapCache overlap(const VariationalState& st);

// <D|D>.  An imaginary residue out of proportion to the accumulated term
// magnitude throws (signals a broken cache).
double state_norm(const VariationalState& st, const OverlapCache& cache);

struct PhotonNumbers {
    double n_left, n_right;
};
PhotonNumbers photon_numbers(const VariationalState& st, const OverlapCache& cache);

struct Imbalance {
    double z, z_norm;  // z_norm = 0 when the total population is < 1e-12
};
Imbalance photon_imbalance(const PhotonNumbers& n);

struct QubitPolarization {
    double sz_left, sz_right;
};
QubitPolarization qubit_polarization(const VariationalState& st,
                                     const OverlapCache& cache);

Eigen::VectorXd bath_populations(const VariationalState& st,
                                 const OverlapCache& cache);

// <D|H|D>; bath must match st.bath_modes().  Disproportionate imaginary
// residue throws.
double energy_expectation(const VariationalState& st, const OverlapCache& cache,
                          const ModelParams& p, const BathDiscretization& bath);

// Flat complex layout, branch-major: A,B,C,D, mu, nu, eta_0..eta_{Nb-1}.
Eigen::VectorXcd pack_state(const VariationalState& st);
VariationalState unpack_state(const Eigen::VectorXcd& y, int branches,
                              int bath_modes, double t);

std::string state_to_json(const VariationalState& st);
VariationalState state_from_json(const std::string& text);

namespace detail {

// Matrix elements between branches m (bra) and n (ket), with the bosonic
// overlap factored out.  hbar is the 4x4 qubit-space Hamiltonian sandwich
// c_m^dag H(m,n) c_n; the same H(m,n) acting on c_n is needed by the EOM
// right-hand side.
struct PairTerms {
    cplx s;                     // total bosonic overlap S_mn
    cplx p;                     // sum_sigma conj(c_m,sigma) c_n,sigma
    cplx xl, xr;                // sigma_x^L, sigma_x^R sandwiches
    cplx zz;                    // (sigma_z^L + sigma_z^R) sandwich
    cplx f_ph, f_bath, f_bq;    // photon / bath / bath-qubit scalar parts
    cplx gl, gr;                // -g (conj(mu_m) + mu_n), same for nu
    cplx hbar;                  // c_m^dag H(m,n) c_n
};

PairTerms pair_terms(const VariationalState& st, const OverlapCache& cache,
                     const ModelParams& p, const BathDiscretization& bath,
                     int m, int n);

// H(m,n) applied to a 4-vector of qubit amplitudes.
Eigen::Vector4cd apply_pair_hamiltonian(const PairTerms& pt, double delta,
                                        const Eigen::Vector4cd& c);

}  // namespace detail

}  // namespace rabidimer
