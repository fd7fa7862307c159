#include "rabidimer/state.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace rabidimer {

namespace {

// Reserve branches (zero amplitude at t = 0) start displaced from the
// occupied branch by this complex-Gaussian scale.  The placement carries no
// physical content -- the t = 0 state is independent of it -- but it sets how
// close branches sit in displacement space once they activate.  Tighter
// placement (1e-3 and below) lets pairs of branches migrate onto the same
// displacement with large cancelling amplitudes, a gauge-degenerate
// configuration whose null-space dynamics grow exponentially and force the
// step size down in proportion to the pair separation.  A 0.1 spread keeps
// branches resolved for the whole run with no loss of t = 0 accuracy.
constexpr double kDisplacementNoiseStd = 0.1;

// Deterministic complex Gaussian with E|z|^2 = std^2 (Box-Muller over the
// raw mt19937_64 stream; std::normal_distribution is not pinned across
// library versions).
class ComplexGaussian {
  public:
    explicit ComplexGaussian(std::uint64_t seed) : rng_(seed) {}
    cplx draw(double std_dev) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r =
            (std_dev / std::numbers::sqrt2) * std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * std::numbers::pi * u2),
                r * std::sin(2.0 * std::numbers::pi * u2)};
    }

  private:
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    std::mt19937_64 rng_;
};

// Hermitian expectation values are real up to rounding that scales with the
// magnitude of the accumulated terms, not with the result: branch pairs with
// large nearly-cancelling amplitudes (how the ansatz builds non-coherent
// corrections) make the term sum orders of magnitude larger than the value.
constexpr double kRealGateRel = 1e-12;
constexpr double kRealGateAbs = 1e-12;

double real_checked(cplx v, double term_magnitude, const char* what) {
    if (std::abs(v.imag()) > kRealGateRel * term_magnitude + kRealGateAbs)
        throw std::runtime_error(std::string(what) + ": imaginary residue " +
                                 std::to_string(v.imag()) +
                                 " (term magnitude " +
                                 std::to_string(term_magnitude) + ")");
    return v.real();
}

// exp of conj(a) b - |a|^2/2 - |b|^2/2 with the real part computed as
// -|a - b|^2 / 2 so the magnitude can never exceed 1.
cplx overlap_factor_term(cplx a, cplx b) {
    const double re = -0.5 * std::norm(a - b);
    const double im = std::imag(std::conj(a) * b);
    return std::polar(std::exp(re), im);
}

}  // namespace

VariationalState init_state(const ModelParams& p, std::uint64_t seed) {
    p.validate();
    const int m = p.multiplicity, nb = p.n_bath;
    VariationalState st;
    st.t = 0.0;
    st.amps = Eigen::MatrixXcd::Zero(m, 4);
    st.mu = Eigen::VectorXcd::Zero(m);
    st.nu = Eigen::VectorXcd::Zero(m);
    st.eta = Eigen::MatrixXcd::Zero(m, nb);
    st.amps(0, 3) = 1.0;  // both qubits down
    st.mu(0) = std::sqrt(p.n_photon_init);
    ComplexGaussian noise(seed);
    for (int n = 1; n < m; ++n) {
        st.mu(n) = noise.draw(kDisplacementNoiseStd);
        st.nu(n) = noise.draw(kDisplacementNoiseStd);
        for (int k = 0; k < nb; ++k) st.eta(n, k) = noise.draw(kDisplacementNoiseStd);
    }
    return st;
}

OverlapCache overlap(const VariationalState& st) {
    const int m = st.branches(), nb = st.bath_modes();
    OverlapCache c;
    c.s_left = Eigen::MatrixXcd::Ones(m, m);
    c.s_right = Eigen::MatrixXcd::Ones(m, m);
    c.s_bath = Eigen::MatrixXcd::Ones(m, m);
    c.s = Eigen::MatrixXcd::Ones(m, m);
    for (int l = 0; l < m; ++l) {
        for (int n = l + 1; n < m; ++n) {
            const cplx sl = overlap_factor_term(st.mu(l), st.mu(n));
            const cplx sr = overlap_factor_term(st.nu(l), st.nu(n));
            double re = 0.0, im = 0.0;
            for (int k = 0; k < nb; ++k) {
                re -= 0.5 * std::norm(st.eta(l, k) - st.eta(n, k));
                im += std::imag(std::conj(st.eta(l, k)) * st.eta(n, k));
            }
            const cplx sb = std::polar(std::exp(re), im);
            c.s_left(l, n) = sl;
            c.s_left(n, l) = std::conj(sl);
            c.s_right(l, n) = sr;
            c.s_right(n, l) = std::conj(sr);
            c.s_bath(l, n) = sb;
            c.s_bath(n, l) = std::conj(sb);
            const cplx s = sl * sr * sb;
            c.s(l, n) = s;
            c.s(n, l) = std::conj(s);
        }
    }
    return c;
}

double state_norm(const VariationalState& st, const OverlapCache& cache) {
    cplx acc = 0.0;
    double mag = 0.0;
    for (int m = 0; m < st.branches(); ++m)
        for (int n = 0; n < st.branches(); ++n) {
            acc += st.amps.row(m).dot(st.amps.row(n)) * cache.s(m, n);
            mag += st.amps.row(m).norm() * st.amps.row(n).norm() *
                   std::abs(cache.s(m, n));
        }
    return real_checked(acc, mag, "state_norm");
}

PhotonNumbers photon_numbers(const VariationalState& st, const OverlapCache& cache) {
    cplx nl = 0.0, nr = 0.0;
    double ml = 0.0, mr = 0.0;
    for (int m = 0; m < st.branches(); ++m) {
        for (int n = 0; n < st.branches(); ++n) {
            const cplx ps = st.amps.row(m).dot(st.amps.row(n)) * cache.s(m, n);
            const double pm = st.amps.row(m).norm() * st.amps.row(n).norm() *
                              std::abs(cache.s(m, n));
            nl += ps * std::conj(st.mu(m)) * st.mu(n);
            nr += ps * std::conj(st.nu(m)) * st.nu(n);
            ml += pm * std::abs(st.mu(m)) * std::abs(st.mu(n));
            mr += pm * std::abs(st.nu(m)) * std::abs(st.nu(n));
        }
    }
    return {real_checked(nl, ml, "photon_numbers:left"),
            real_checked(nr, mr, "photon_numbers:right")};
}

Imbalance photon_imbalance(const PhotonNumbers& n) {
    const double z = n.n_left - n.n_right;
    const double total = n.n_left + n.n_right;
    return {z, total < 1e-12 ? 0.0 : z / total};
}

QubitPolarization qubit_polarization(const VariationalState& st,
                                     const OverlapCache& cache) {
    cplx zl = 0.0, zr = 0.0;
    double mag = 0.0;
    for (int m = 0; m < st.branches(); ++m) {
        for (int n = 0; n < st.branches(); ++n) {
            const auto& a = st.amps;
            const cplx s = cache.s(m, n);
            zl += s * (std::conj(a(m, 0)) * a(n, 0) + std::conj(a(m, 1)) * a(n, 1) -
                       std::conj(a(m, 2)) * a(n, 2) - std::conj(a(m, 3)) * a(n, 3));
            zr += s * (std::conj(a(m, 0)) * a(n, 0) - std::conj(a(m, 1)) * a(n, 1) +
                       std::conj(a(m, 2)) * a(n, 2) - std::conj(a(m, 3)) * a(n, 3));
            mag += a.row(m).norm() * a.row(n).norm() * std::abs(s);
        }
    }
    return {real_checked(zl, mag, "qubit_polarization:left"),
            real_checked(zr, mag, "qubit_polarization:right")};
}

Eigen::VectorXd bath_populations(const VariationalState& st,
                                 const OverlapCache& cache) {
    const int nb = st.bath_modes();
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(nb);
    Eigen::VectorXd mag = Eigen::VectorXd::Zero(nb);
    for (int m = 0; m < st.branches(); ++m) {
        for (int n = 0; n < st.branches(); ++n) {
            const cplx ps = st.amps.row(m).dot(st.amps.row(n)) * cache.s(m, n);
            const double pm = st.amps.row(m).norm() * st.amps.row(n).norm() *
                              std::abs(cache.s(m, n));
            acc += ps * (st.eta.row(m).conjugate().cwiseProduct(st.eta.row(n))).transpose();
            mag += pm * (st.eta.row(m).cwiseAbs().cwiseProduct(st.eta.row(n).cwiseAbs())).transpose();
        }
    }
    Eigen::VectorXd out(nb);
    for (int k = 0; k < nb; ++k)
        out(k) = real_checked(acc(k), mag(k), "bath_populations");
    return out;
}

double energy_expectation(const VariationalState& st, const OverlapCache& cache,
                          const ModelParams& p, const BathDiscretization& bath) {
    if (bath.size() != st.bath_modes())
        throw std::invalid_argument("energy_expectation: bath size mismatch");
    cplx acc = 0.0;
    double mag = 0.0;
    for (int m = 0; m < st.branches(); ++m)
        for (int n = 0; n < st.branches(); ++n) {
            const auto pt = detail::pair_terms(st, cache, p, bath, m, n);
            acc += pt.s * pt.hbar;
            mag += std::abs(pt.s) *
                   (std::abs((0.5 * p.delta + pt.f_bq) * pt.zz) +
                    std::abs((pt.f_ph + pt.f_bath) * pt.p) +
                    std::abs(pt.gl * pt.xl) + std::abs(pt.gr * pt.xr));
        }
    return real_checked(acc, mag, "energy_expectation");
}

Eigen::VectorXcd pack_state(const VariationalState& st) {
    const int m = st.branches(), nb = st.bath_modes(), stride = 4 + st.modes();
    Eigen::VectorXcd y(st.dof());
    for (int b = 0; b < m; ++b) {
        y.segment(b * stride, 4) = st.amps.row(b).transpose();
        y(b * stride + 4) = st.mu(b);
        y(b * stride + 5) = st.nu(b);
        y.segment(b * stride + 6, nb) = st.eta.row(b).transpose();
    }
    return y;
}

VariationalState unpack_state(const Eigen::VectorXcd& y, int branches,
                              int bath_modes, double t) {
    const int stride = 4 + 2 + bath_modes;
    if (y.size() != static_cast<long>(branches) * stride)
        throw std::invalid_argument("unpack_state: size mismatch");
    VariationalState st;
    st.t = t;
    st.amps.resize(branches, 4);
    st.mu.resize(branches);
    st.nu.resize(branches);
    st.eta.resize(branches, bath_modes);
    for (int b = 0; b < branches; ++b) {
        st.amps.row(b) = y.segment(b * stride, 4).transpose();
        st.mu(b) = y(b * stride + 4);
        st.nu(b) = y(b * stride + 5);
        st.eta.row(b) = y.segment(b * stride + 6, bath_modes).transpose();
    }
    return st;
}

namespace {

nlohmann::ordered_json complex_to_json(cplx v) {
    return nlohmann::ordered_json::array({v.real(), v.imag()});
}

cplx complex_from_json(const nlohmann::json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

std::string state_to_json(const VariationalState& st) {
    nlohmann::ordered_json j;
    j["t"] = st.t;
    j["branches"] = st.branches();
    j["n_bath"] = st.bath_modes();
    auto dump_matrix = [](const Eigen::MatrixXcd& m) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (long r = 0; r < m.rows(); ++r) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (long c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
            rows.push_back(row);
        }
        return rows;
    };
    j["amps"] = dump_matrix(st.amps);
    j["mu"] = dump_matrix(st.mu);
    j["nu"] = dump_matrix(st.nu);
    j["eta"] = dump_matrix(st.eta);
    return j.dump();
}

VariationalState state_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const int m = j.at("branches").get<int>();
    const int nb = j.at("n_bath").get<int>();
    VariationalState st;
    st.t = j.at("t").get<double>();
    st.amps.resize(m, 4);
    st.mu.resize(m);
    st.nu.resize(m);
    st.eta.resize(m, nb);
    auto load_matrix = [](const nlohmann::json& rows, Eigen::MatrixXcd& out) {
        for (long r = 0; r < out.rows(); ++r)
            for (long c = 0; c < out.cols(); ++c)
                out(r, c) = complex_from_json(rows.at(r).at(c));
    };
    load_matrix(j.at("amps"), st.amps);
    Eigen::MatrixXcd mu(m, 1), nu(m, 1);
    load_matrix(j.at("mu"), mu);
    load_matrix(j.at("nu"), nu);
    st.mu = mu.col(0);
    st.nu = nu.col(0);
    load_matrix(j.at("eta"), st.eta);
    return st;
}

namespace detail {

PairTerms pair_terms(const VariationalState& st, const OverlapCache& cache,
                     const ModelParams& p, const BathDiscretization& bath,
                     int m, int n) {
    PairTerms pt;
    const auto& a = st.amps;
    pt.s = cache.s(m, n);
    pt.p = a.row(m).dot(a.row(n));
    pt.xl = std::conj(a(m, 0)) * a(n, 2) + std::conj(a(m, 1)) * a(n, 3) +
            std::conj(a(m, 2)) * a(n, 0) + std::conj(a(m, 3)) * a(n, 1);
    pt.xr = std::conj(a(m, 0)) * a(n, 1) + std::conj(a(m, 1)) * a(n, 0) +
            std::conj(a(m, 2)) * a(n, 3) + std::conj(a(m, 3)) * a(n, 2);
    pt.zz = 2.0 * (std::conj(a(m, 0)) * a(n, 0) - std::conj(a(m, 3)) * a(n, 3));
    const cplx mu_m = std::conj(st.mu(m)), nu_m = std::conj(st.nu(m));
    pt.f_ph = p.omega0 * (mu_m * st.mu(n) + nu_m * st.nu(n)) -
              p.j_tunnel * (mu_m * st.nu(n) + nu_m * st.mu(n));
    pt.f_bath = 0.0;
    pt.f_bq = 0.0;
    for (int k = 0; k < bath.size(); ++k) {
        const cplx em = std::conj(st.eta(m, k));
        pt.f_bath += bath.omega[k] * em * st.eta(n, k);
        pt.f_bq += bath.phi[k] * (em + st.eta(n, k));
    }
    pt.gl = -p.g * (mu_m + st.mu(n));
    pt.gr = -p.g * (nu_m + st.nu(n));
    pt.hbar = (0.5 * p.delta + pt.f_bq) * pt.zz + (pt.f_ph + pt.f_bath) * pt.p +
              pt.gl * pt.xl + pt.gr * pt.xr;
    return pt;
}

Eigen::Vector4cd apply_pair_hamiltonian(const PairTerms& pt, double delta,
                                        const Eigen::Vector4cd& c) {
    const cplx dz = 0.5 * delta + pt.f_bq;  // coefficient of sigma_z^L + sigma_z^R
    const cplx id = pt.f_ph + pt.f_bath;
    Eigen::Vector4cd out;
    out(0) = 2.0 * dz * c(0) + id * c(0) + pt.gl * c(2) + pt.gr * c(1);
    out(1) = id * c(1) + pt.gl * c(3) + pt.gr * c(0);
    out(2) = id * c(2) + pt.gl * c(0) + pt.gr * c(3);
    out(3) = -2.0 * dz * c(3) + id * c(3) + pt.gl * c(1) + pt.gr * c(2);
    return out;
}

}  // namespace detail

}  // namespace rabidimer
