#pragma once

#include <vector>

#include "rabidimer/params.hpp"

namespace rabidimer {

// Discretized common bath: n_bath modes on a logarithmic grid spanning
// [1e-3 * omega_c, omega_max].  Each mode carries the full spectral weight of
// its bin, phi_k^2 = integral of J over the bin, and sits at the bin's
// weight centroid so low-order moments of J are reproduced.
struct BathDiscretization {
    std::vector<double> omega;  // mode frequencies, strictly increasing
    std::vector<double> phi;    // couplings, phi_k >= 0
    std::vector<double> edges;  // bin edges, size n_bath + 1
    int size() const { return static_cast<int>(omega.size()); }
};

// J(omega) = 2 * alpha * omega_c^(1-s) * omega^s * exp(-omega/omega_c).
// Throws std::domain_error for omega <= 0.
double spectral_density(double omega, const ModelParams& p);

// Splits [1e-3 * omega_c, omega_max] into n_bath logarithmic bins.  Bins with
// vanishing spectral weight (e.g. alpha = 0) fall back to their geometric
// midpoint.  n_bath = 0 yields an empty discretization.
BathDiscretization discretize_bath(const ModelParams& p);

}  // namespace rabidimer
