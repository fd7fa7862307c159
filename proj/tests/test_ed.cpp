#include "rabidimer/ed.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "fock_oracle.hpp"

using namespace rabidimer;
using std::numbers::pi;

namespace {

// Index of the basis state (q, nl, nr, nb...) in the truncated-basis layout
// (qubit most significant, last bath mode least significant).
long basis_index(const TruncatedBasis& b, int q, int nl, int nr,
                 const std::vector<int>& nb) {
    long idx = (static_cast<long>(q) * (b.n_max_l + 1) + nl) * (b.n_max_r + 1) + nr;
    for (int j = 0; j < b.bath_count(); ++j) idx = idx * (b.n_max_bath + 1) + nb[j];
    return idx;
}

Eigen::VectorXcd unit_vector(const TruncatedBasis& b, int q, int nl, int nr,
                             const std::vector<int>& nb = {}) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(b.dim());
    psi(basis_index(b, q, nl, nr, nb)) = 1.0;
    return psi;
}

}  // namespace

TEST_CASE("uncoupled hamiltonian is diagonal with the level spectrum") {
    ModelParams p;
    p.delta = 0.7;
    const BathDiscretization no_bath;
    TruncatedBasis b;
    b.n_max_l = 3;
    b.n_max_r = 2;
    const auto h = build_hamiltonian(p, no_bath, b);

    // Off-diagonal part vanishes entirely.
    double off = 0.0;
    for (int k = 0; k < h.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(h, k); it; ++it)
            if (it.row() != it.col()) off += std::abs(it.value());
    CHECK(off == 0.0);

    // E(q, nl, nr) = (delta/2)(sz_L + sz_R) + omega0 (nl + nr).
    const double sz2[4] = {2.0, 0.0, 0.0, -2.0};
    for (int q = 0; q < 4; ++q)
        for (int nl = 0; nl <= 3; ++nl)
            for (int nr = 0; nr <= 2; ++nr) {
                const auto psi = unit_vector(b, q, nl, nr);
                CHECK(energy_ed(h, psi) ==
                      doctest::Approx(0.5 * p.delta * sz2[q] + nl + nr)
                          .epsilon(1e-14));
            }

    // Both qubits down, no photons, is the ground state at -delta.
    Eigen::MatrixXd dense(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-p.delta).epsilon(1e-14));
}

TEST_CASE("hamiltonian matches the brute-force operator application") {
    ModelParams p;
    p.delta = 0.7;
    p.j_tunnel = 0.13;
    p.g = 0.21;
    BathDiscretization bath;
    bath.omega = {0.8, 2.3};
    bath.phi = {0.17, 0.09};
    bath.edges = {0.5, 1.2, 3.0};

    TruncatedBasis b;
    b.n_max_l = 4;
    b.n_max_r = 3;
    b.n_max_bath = 2;
    b.included_modes = {0, 1};
    const auto h = build_hamiltonian(p, bath, b);

    fock_oracle::FockSpace fs;
    fs.n_max_l = 4;
    fs.n_max_r = 3;
    fs.n_max_bath = 2;
    fs.n_bath = 2;
    REQUIRE(fs.dim() == b.dim());

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXcd psi_o(fs.dim());
    for (long i = 0; i < psi_o.size(); ++i) psi_o(i) = cplx{u(rng), u(rng)};

    // Carry the same vector over to the other layout, apply each side's H,
    // and compare component by component.
    Eigen::VectorXcd psi_b(b.dim());
    std::vector<int> nb;
    for (long i = 0; i < psi_o.size(); ++i) {
        int q, nl, nr;
        fs.decode(i, q, nl, nr, nb);
        psi_b(basis_index(b, q, nl, nr, nb)) = psi_o(i);
    }
    const Eigen::VectorXcd hpsi_o =
        fock_oracle::apply_h(psi_o, fs, p, {bath.omega[0], bath.omega[1]},
                             {bath.phi[0], bath.phi[1]});
    Eigen::VectorXcd hpsi_b(b.dim());
    hpsi_b.real() = h * psi_b.real().eval();
    hpsi_b.imag() = h * psi_b.imag().eval();

    double worst = 0.0;
    for (long i = 0; i < psi_o.size(); ++i) {
        int q, nl, nr;
        fs.decode(i, q, nl, nr, nb);
        worst = std::max(
            worst, std::abs(hpsi_o(i) - hpsi_b(basis_index(b, q, nl, nr, nb))));
    }
    CHECK(worst < 1e-12 * hpsi_o.norm());
}

TEST_CASE("krylov propagation matches the dense matrix exponential") {
    ModelParams p;
    p.j_tunnel = 0.05;
    p.g = 0.3;
    BathDiscretization bath;
    bath.omega = {0.8};
    bath.phi = {0.1};
    bath.edges = {0.5, 1.2};
    TruncatedBasis b;
    b.n_max_l = 6;
    b.n_max_r = 6;
    b.n_max_bath = 4;
    b.included_modes = {0};
    const auto h = build_hamiltonian(p, bath, b);

    Eigen::VectorXcd eta(1);
    eta(0) = 0.3;
    const Eigen::VectorXcd psi0 =
        coherent_product_state(b, 3, 0.6, cplx{0.0, 0.3}, eta);

    const double t = 3.0;
    const Eigen::VectorXcd psi_k = propagate_exact(h, psi0, t);

    Eigen::MatrixXd dense(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    const Eigen::MatrixXcd u = es.eigenvectors().cast<cplx>();
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (long j = 0; j < phases.size(); ++j)
        phases(j) = std::polar(1.0, -es.eigenvalues()(j) * t);
    const Eigen::VectorXcd psi_d =
        u * phases.cwiseProduct((u.adjoint() * psi0).eval());

    CHECK((psi_k - psi_d).norm() < 1e-9);
}

TEST_CASE("propagation is unitary and conserves energy") {
    ModelParams p;
    p.j_tunnel = 0.05;
    p.g = 0.3;
    BathDiscretization bath;
    bath.omega = {2.0};
    bath.phi = {0.15};
    bath.edges = {1.0, 3.0};
    TruncatedBasis b;
    b.n_max_l = 8;
    b.n_max_r = 8;
    b.n_max_bath = 6;
    b.included_modes = {0};
    const auto h = build_hamiltonian(p, bath, b);
    const Eigen::VectorXcd psi0 =
        unit_vector(b, 3, 0, 0, {0});
    const double e0 = energy_ed(h, psi0);

    const Eigen::VectorXcd psi = propagate_exact(h, psi0, 5.0);
    CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
    CHECK(std::abs(energy_ed(h, psi) - e0) < 1e-10);
}

TEST_CASE("photon exchange follows the beam-splitter law") {
    // g = 0 keeps the qubits frozen and the photons exchange coherently:
    // N_L = N0 cos^2(J t), Z = N0 cos(2 J t).
    ModelParams p;
    p.j_tunnel = 0.2;
    const double n0 = 2.0;
    const BathDiscretization no_bath;
    TruncatedBasis b;
    b.n_max_l = 14;
    b.n_max_r = 14;
    const auto h = build_hamiltonian(p, no_bath, b);
    const Eigen::VectorXcd psi0 =
        coherent_product_state(b, 3, std::sqrt(n0), 0.0, Eigen::VectorXcd());

    std::vector<double> times;
    for (int i = 0; i <= 10; ++i) times.push_back(0.5 * i);
    double leak = 0.0;
    const auto samples = propagate_sampled(h, psi0, b, times, &leak);
    CHECK(leak < 1e-6);
    REQUIRE(samples.size() == times.size());
    for (const auto& s : samples) {
        const double c = std::cos(p.j_tunnel * s.t);
        CHECK(std::abs(s.obs.n_left - n0 * c * c) < 1e-6);
        CHECK(std::abs(s.obs.z - n0 * std::cos(2 * p.j_tunnel * s.t)) < 1e-6);
        CHECK(std::abs(s.obs.sz_left + 1.0) < 1e-9);
        CHECK(std::abs(s.obs.sz_right + 1.0) < 1e-9);
    }
}

TEST_CASE("site dynamics reproduce the displaced-oscillator laws") {
    // Delta = 0, J = 0: each site is an independent-boson problem.  From the
    // qubit-down vacuum, splitting the qubit over the sigma_x eigenstates
    // gives two oppositely displaced oscillators, so per site
    //   <n(t)>    = 2 (g/omega0)^2 (1 - cos omega0 t)
    //   <sz(t)>   = -exp(-4 (g/omega0)^2 (1 - cos omega0 t)).
    ModelParams p;
    p.delta = 0.0;
    p.g = 0.3;
    const BathDiscretization no_bath;
    TruncatedBasis b;
    b.n_max_l = 10;
    b.n_max_r = 10;
    const auto h = build_hamiltonian(p, no_bath, b);
    const Eigen::VectorXcd psi0 =
        coherent_product_state(b, 3, 0.0, 0.0, Eigen::VectorXcd());

    const std::vector<double> times{0.0, 0.5, 1.0, pi, 4.0, 5.0, 2 * pi};
    const auto samples = propagate_sampled(h, psi0, b, times);
    const double r = p.g * p.g;  // (g / omega0)^2 with omega0 = 1
    for (const auto& s : samples) {
        const double f = 1.0 - std::cos(s.t);
        for (double n : {s.obs.n_left, s.obs.n_right})
            CHECK(std::abs(n - 2 * r * f) < 1e-7);
        for (double sz : {s.obs.sz_left, s.obs.sz_right})
            CHECK(std::abs(sz + std::exp(-4 * r * f)) < 1e-7);
    }
}

TEST_CASE("basis dimension is guarded") {
    TruncatedBasis b;
    b.n_max_l = 100;
    b.n_max_r = 100;
    b.n_max_bath = 9;
    b.included_modes = {0, 1, 2};  // 4 * 101^2 * 10^3 ~ 4e7 states
    CHECK_THROWS_AS(b.dim(), std::invalid_argument);

    b.included_modes = {0};
    CHECK(b.dim() == 4L * 101 * 101 * 10);

    b.n_max_l = -1;
    CHECK_THROWS_AS(b.dim(), std::invalid_argument);

    // Included modes must exist in the discretization.
    ModelParams p;
    BathDiscretization bath;
    bath.omega = {1.0};
    bath.phi = {0.1};
    bath.edges = {0.5, 1.5};
    TruncatedBasis bad;
    bad.n_max_l = 1;
    bad.n_max_r = 1;
    bad.n_max_bath = 1;
    bad.included_modes = {1};
    CHECK_THROWS_AS(build_hamiltonian(p, bath, bad), std::invalid_argument);
}

TEST_CASE("truncated coherent state rejects lossy cutoffs") {
    TruncatedBasis tight;
    tight.n_max_l = 2;
    tight.n_max_r = 2;
    CHECK_THROWS_AS(
        coherent_product_state(tight, 3, std::sqrt(2.0), 0.0, Eigen::VectorXcd()),
        std::invalid_argument);

    TruncatedBasis roomy;
    roomy.n_max_l = 14;
    roomy.n_max_r = 14;
    const auto psi =
        coherent_product_state(roomy, 3, std::sqrt(2.0), 0.0, Eigen::VectorXcd());
    CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
    const auto obs = observables_ed(psi, roomy);
    CHECK(std::abs(obs.n_left - 2.0) < 1e-7);
    CHECK(std::abs(obs.n_right) < 1e-12);

    CHECK_THROWS_AS(
        coherent_product_state(roomy, 4, 0.0, 0.0, Eigen::VectorXcd()),
        std::invalid_argument);
    CHECK_THROWS_AS(
        coherent_product_state(roomy, 0, 0.0, 0.0, Eigen::VectorXcd::Ones(1)),
        std::invalid_argument);
}

TEST_CASE("cutoff doubling leaves observables converged") {
    ModelParams p;
    p.j_tunnel = 0.05;
    p.g = 0.3;
    BathDiscretization bath;
    bath.omega = {2.0};
    bath.phi = {0.15};
    bath.edges = {1.0, 3.0};

    auto run_with = [&](int nmax, int nmax_bath) {
        TruncatedBasis b;
        b.n_max_l = nmax;
        b.n_max_r = nmax;
        b.n_max_bath = nmax_bath;
        b.included_modes = {0};
        const auto h = build_hamiltonian(p, bath, b);
        const Eigen::VectorXcd psi0 = unit_vector(b, 3, 0, 0, {0});
        const Eigen::VectorXcd psi = propagate_exact(h, psi0, 2.0);
        return observables_ed(psi, b);
    };
    const EdObservables coarse = run_with(8, 6);
    const EdObservables fine = run_with(16, 12);
    CHECK(std::abs(coarse.n_left - fine.n_left) < 1e-8);
    CHECK(std::abs(coarse.n_right - fine.n_right) < 1e-8);
    CHECK(std::abs(coarse.sz_left - fine.sz_left) < 1e-8);
    CHECK(std::abs(coarse.sz_right - fine.sz_right) < 1e-8);
    CHECK(std::abs(coarse.bath_populations(0) - fine.bath_populations(0)) < 1e-8);
}

TEST_CASE("edge occupancy reports the top-level weight") {
    TruncatedBasis b;
    b.n_max_l = 2;
    b.n_max_r = 2;
    CHECK(edge_occupancy(unit_vector(b, 3, 2, 0), b) == 1.0);
    CHECK(edge_occupancy(unit_vector(b, 3, 0, 0), b) == 0.0);

    TruncatedBasis roomy;
    roomy.n_max_l = 12;
    roomy.n_max_r = 12;
    const auto psi =
        coherent_product_state(roomy, 3, 0.6, 0.0, Eigen::VectorXcd());
    CHECK(edge_occupancy(psi, roomy) < 1e-12);
}

TEST_CASE("comparison report flags disagreements") {
    auto record = [](double t, double n_left) {
        TimeSeriesRecord r{};
        r.t = t;
        r.n_left = n_left;
        return r;
    };
    auto sample = [](double t, double n_left) {
        EdSample s;
        s.t = t;
        s.obs = EdObservables{};
        s.obs.n_left = n_left;
        s.obs.bath_populations = Eigen::VectorXd();
        return s;
    };
    const std::vector<TimeSeriesRecord> run{record(0.0, 1.0), record(1.0, 0.9)};
    const std::vector<EdSample> oracle{sample(0.0, 1.0), sample(1.0, 0.905)};

    const ComparisonReport ok = compare_observables(run, oracle, {"n_left"}, 1e-2);
    CHECK(ok.all_pass);
    REQUIRE(ok.rows.size() == 1);
    CHECK(ok.rows[0].max_abs_dev == doctest::Approx(5e-3).epsilon(1e-9));
    CHECK(ok.rows[0].t_worst == 1.0);

    const ComparisonReport bad = compare_observables(run, oracle, {"n_left"}, 1e-3);
    CHECK(!bad.all_pass);
    CHECK(!bad.rows[0].pass);

    // Grid and name errors are refused, not glossed over.
    std::vector<EdSample> shifted = oracle;
    shifted[1].t = 1.1;
    CHECK_THROWS_AS(compare_observables(run, shifted, {"n_left"}, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(compare_observables(run, oracle, {"bogus"}, 1.0),
                    std::invalid_argument);
    std::vector<EdSample> short_oracle{oracle[0]};
    CHECK_THROWS_AS(compare_observables(run, short_oracle, {"n_left"}, 1.0),
                    std::invalid_argument);
}
