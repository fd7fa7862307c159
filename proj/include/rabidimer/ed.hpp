#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <filesystem>
#include <string>
#include <vector>

#include "rabidimer/bath.hpp"
#include "rabidimer/integrator.hpp"
#include "rabidimer/params.hpp"
#include "rabidimer/state.hpp"

namespace rabidimer {

// Product Fock basis: 4 qubit configurations (up-up, up-down, down-up,
// down-down — same ordering as the variational amplitudes) x left photons
// x right photons x one register per included bath mode.  All included
// bath modes share the cutoff n_max_bath.
struct TruncatedBasis {
    int n_max_l = 0;
    int n_max_r = 0;
    int n_max_bath = 0;
    std::vector<int> included_modes;  // indices into the bath arrays

    // Throws std::invalid_argument above 1e7 states.
    long dim() const;
    int bath_count() const { return static_cast<int>(included_modes.size()); }
};

// Real symmetric in this basis (every coupling constant is real).
Eigen::SparseMatrix<double> build_hamiltonian(const ModelParams& p,
                                              const BathDiscretization& bath,
                                              const TruncatedBasis& basis);

// Normalized truncated coherent product state |qubit> |mu>_L |nu>_R |eta_j>.
// Throws if the truncated tails carry more than max_mismatch of the weight.
Eigen::VectorXcd coherent_product_state(const TruncatedBasis& basis, int qubit_config,
                                        cplx mu, cplx nu,
                                        const Eigen::VectorXcd& eta,
                                        double max_mismatch = 1e-6);

// Krylov (Lanczos) propagation of exp(-i H t) psi with adaptive substeps;
// preserves the norm to machine precision by construction.
Eigen::VectorXcd propagate_exact(const Eigen::SparseMatrix<double>& h,
                                 const Eigen::VectorXcd& psi, double t,
                                 double tol = 1e-12);

struct EdObservables {
    double n_left, n_right, z, z_norm, sz_left, sz_right;
    Eigen::VectorXd bath_populations;
};
EdObservables observables_ed(const Eigen::VectorXcd& psi, const TruncatedBasis& basis);

double energy_ed(const Eigen::SparseMatrix<double>& h, const Eigen::VectorXcd& psi);

// Largest probability sitting on the top Fock level of any mode; the basis
// is trustworthy only while this stays small (< 1e-6).
double edge_occupancy(const Eigen::VectorXcd& psi, const TruncatedBasis& basis);

struct EdSample {
    double t;
    EdObservables obs;
};

// Sequential propagation through the given times (must be increasing,
// starting at the state's t = times[0]).  max_leakage, if given, receives
// the worst edge occupancy seen.
std::vector<EdSample> propagate_sampled(const Eigen::SparseMatrix<double>& h,
                                        const Eigen::VectorXcd& psi0,
                                        const TruncatedBasis& basis,
                                        const std::vector<double>& times,
                                        double* max_leakage = nullptr);

struct ComparisonRow {
    std::string observable;
    double t_worst;
    double max_abs_dev;
    double tolerance;
    bool pass;
};
struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool all_pass = true;
};

// Matches records to oracle samples index-by-index (times must agree within
// 1e-9) and gates the named observables at the given absolute tolerance.
// Known names: n_left, n_right, z, z_norm, sz_left, sz_right.
ComparisonReport compare_observables(const std::vector<TimeSeriesRecord>& run,
                                     const std::vector<EdSample>& oracle,
                                     const std::vector<std::string>& names,
                                     double tolerance);

void write_comparison_csv(const std::filesystem::path& file,
                          const ComparisonReport& report);

}  // namespace rabidimer
