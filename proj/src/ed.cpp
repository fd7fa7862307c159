#include "rabidimer/ed.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace rabidimer {

namespace {

// Occupation digits of one basis state: qubit config, n_l, n_r, bath modes.
struct Digits {
    int q, nl, nr;
    std::vector<int> nb;
};

Digits decode(long idx, const TruncatedBasis& b) {
    Digits d;
    d.nb.resize(b.bath_count());
    for (int j = b.bath_count() - 1; j >= 0; --j) {
        d.nb[j] = static_cast<int>(idx % (b.n_max_bath + 1));
        idx /= (b.n_max_bath + 1);
    }
    d.nr = static_cast<int>(idx % (b.n_max_r + 1));
    idx /= (b.n_max_r + 1);
    d.nl = static_cast<int>(idx % (b.n_max_l + 1));
    idx /= (b.n_max_l + 1);
    d.q = static_cast<int>(idx);
    return d;
}

// sz_L + sz_R per qubit configuration, and the sigma_x partner indices.
constexpr double sz2[4] = {2.0, 0.0, 0.0, -2.0};
constexpr double szl[4] = {1.0, 1.0, -1.0, -1.0};
constexpr double szr[4] = {1.0, -1.0, 1.0, -1.0};
constexpr int flip_l[4] = {2, 3, 0, 1};
constexpr int flip_r[4] = {1, 0, 3, 2};

Eigen::VectorXcd matvec(const Eigen::SparseMatrix<double>& h,
                        const Eigen::VectorXcd& x) {
    Eigen::VectorXcd y(x.size());
    y.real() = h * x.real().eval();
    y.imag() = h * x.imag().eval();
    return y;
}

}  // namespace

long TruncatedBasis::dim() const {
    if (n_max_l < 0 || n_max_r < 0 || n_max_bath < 0)
        throw std::invalid_argument("TruncatedBasis: negative cutoff");
    long double d = 4.0L * (n_max_l + 1) * (n_max_r + 1);
    for (int j = 0; j < bath_count(); ++j) d *= (n_max_bath + 1);
    if (d > 1e7L)
        throw std::invalid_argument("TruncatedBasis: dimension exceeds 1e7");
    return static_cast<long>(d);
}

Eigen::SparseMatrix<double> build_hamiltonian(const ModelParams& p,
                                              const BathDiscretization& bath,
                                              const TruncatedBasis& basis) {
    p.validate();
    const long n = basis.dim();
    const int kb = basis.bath_count();
    std::vector<double> w_mode(kb), phi_mode(kb);
    for (int j = 0; j < kb; ++j) {
        const int src = basis.included_modes[j];
        if (src < 0 || src >= bath.size())
            throw std::invalid_argument("build_hamiltonian: included mode out of range");
        w_mode[j] = bath.omega[src];
        phi_mode[j] = bath.phi[src];
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(n) * (3 + 2 * kb));

    // Strides of each digit in the flattened index.
    std::vector<long> stride_b(kb, 1);
    for (int j = kb - 2; j >= 0; --j)
        stride_b[j] = stride_b[j + 1] * (basis.n_max_bath + 1);
    const long stride_r = kb > 0 ? stride_b[0] * (basis.n_max_bath + 1) : 1;
    const long stride_l = stride_r * (basis.n_max_r + 1);
    const long stride_q = stride_l * (basis.n_max_l + 1);

    for (long i = 0; i < n; ++i) {
        const Digits d = decode(i, basis);
        double diag = 0.5 * p.delta * sz2[d.q] + p.omega0 * (d.nl + d.nr);
        for (int j = 0; j < kb; ++j) diag += w_mode[j] * d.nb[j];
        trip.emplace_back(i, i, diag);

        // -J (aL^dag aR + aR^dag aL): raise left, lower right (+ transpose).
        if (d.nl < basis.n_max_l && d.nr > 0) {
            const double v = -p.j_tunnel * std::sqrt((d.nl + 1.0) * d.nr);
            const long j_idx = i + stride_l - stride_r;
            trip.emplace_back(j_idx, i, v);
            trip.emplace_back(i, j_idx, v);
        }
        // -g (aL^dag + aL) sigma_x^L: raising part (+ transpose).
        if (d.nl < basis.n_max_l) {
            const double v = -p.g * std::sqrt(d.nl + 1.0);
            const long j_idx = i + stride_l + (flip_l[d.q] - d.q) * stride_q;
            trip.emplace_back(j_idx, i, v);
            trip.emplace_back(i, j_idx, v);
        }
        // -g (aR^dag + aR) sigma_x^R.
        if (d.nr < basis.n_max_r) {
            const double v = -p.g * std::sqrt(d.nr + 1.0);
            const long j_idx = i + stride_r + (flip_r[d.q] - d.q) * stride_q;
            trip.emplace_back(j_idx, i, v);
            trip.emplace_back(i, j_idx, v);
        }
        // phi_k (b^dag + b)(sz_L + sz_R): raising part (+ transpose).
        for (int j = 0; j < kb; ++j) {
            if (d.nb[j] < basis.n_max_bath && sz2[d.q] != 0.0) {
                const double v = phi_mode[j] * std::sqrt(d.nb[j] + 1.0) * sz2[d.q];
                const long j_idx = i + stride_b[j];
                trip.emplace_back(j_idx, i, v);
                trip.emplace_back(i, j_idx, v);
            }
        }
    }
    Eigen::SparseMatrix<double> h(n, n);
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

Eigen::VectorXcd coherent_product_state(const TruncatedBasis& basis, int qubit_config,
                                        cplx mu, cplx nu,
                                        const Eigen::VectorXcd& eta,
                                        double max_mismatch) {
    if (qubit_config < 0 || qubit_config > 3)
        throw std::invalid_argument("coherent_product_state: bad qubit config");
    if (eta.size() != basis.bath_count())
        throw std::invalid_argument("coherent_product_state: eta size mismatch");

    auto ladder = [](cplx alpha, int nmax) {
        // e^{-|a|^2/2} a^n / sqrt(n!) up to the cutoff.
        Eigen::VectorXcd c(nmax + 1);
        c(0) = std::exp(-0.5 * std::norm(alpha));
        for (int k = 1; k <= nmax; ++k) c(k) = c(k - 1) * alpha / std::sqrt(double(k));
        return c;
    };
    const Eigen::VectorXcd cl = ladder(mu, basis.n_max_l);
    const Eigen::VectorXcd cr = ladder(nu, basis.n_max_r);
    std::vector<Eigen::VectorXcd> cb;
    for (int j = 0; j < basis.bath_count(); ++j)
        cb.push_back(ladder(eta(j), basis.n_max_bath));

    const long n = basis.dim();
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
    for (long i = 0; i < n; ++i) {
        const Digits d = decode(i, basis);
        if (d.q != qubit_config) continue;
        cplx amp = cl(d.nl) * cr(d.nr);
        for (int j = 0; j < basis.bath_count(); ++j) amp *= cb[j](d.nb[j]);
        psi(i) = amp;
    }
    const double captured = psi.squaredNorm();
    if (1.0 - captured > max_mismatch)
        throw std::invalid_argument(
            "coherent_product_state: truncation holds only " +
            std::to_string(captured) + " of the weight");
    psi /= std::sqrt(captured);
    return psi;
}

Eigen::VectorXcd propagate_exact(const Eigen::SparseMatrix<double>& h,
                                 const Eigen::VectorXcd& psi, double t,
                                 double tol) {
    if (t == 0.0) return psi;
    const long dim = psi.size();
    const int m_max = static_cast<int>(std::min<long>(dim, 30));
    Eigen::VectorXcd cur = psi;
    double remaining = t;
    double tau = t;
    int guard = 0;
    while (remaining > 1e-14 * std::abs(t)) {
        if (++guard > 100000) throw std::runtime_error("propagate_exact: too many substeps");
        tau = std::min(tau, remaining);

        // Lanczos with full reorthogonalization; h is real symmetric, so the
        // tridiagonal coefficients are real.
        std::vector<Eigen::VectorXcd> v;
        Eigen::VectorXd alpha(m_max), beta(m_max);
        const double nrm = cur.norm();
        v.push_back(cur / nrm);
        int m = 0;
        double beta_next = 0.0;
        for (int j = 0; j < m_max; ++j) {
            Eigen::VectorXcd w = matvec(h, v[j]);
            alpha(j) = w.dot(v[j]).real();
            w -= alpha(j) * v[j];
            if (j > 0) w -= beta(j - 1) * v[j - 1];
            for (const auto& prev : v) w -= prev.dot(w) * prev;  // reorthogonalize
            m = j + 1;
            beta_next = w.norm();
            if (j + 1 < m_max) {
                if (beta_next < 1e-14 * std::abs(alpha(j))) break;  // happy breakdown
                beta(j) = beta_next;
                v.push_back(w / beta_next);
            }
        }

        Eigen::MatrixXd tmat = Eigen::MatrixXd::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            tmat(j, j) = alpha(j);
            if (j + 1 < m) tmat(j, j + 1) = tmat(j + 1, j) = beta(j);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tmat);
        const Eigen::VectorXd& ev = es.eigenvalues();
        const Eigen::MatrixXd& u = es.eigenvectors();
        Eigen::VectorXcd phases(m);
        for (int j = 0; j < m; ++j) phases(j) = std::polar(1.0, -ev(j) * tau);
        const Eigen::VectorXcd small =
            u.cast<cplx>() * phases.cwiseProduct(u.row(0).transpose().cast<cplx>());

        // Weight that would leak onto the next Krylov vector.
        const double err = (m == static_cast<int>(dim) || beta_next < 1e-300)
                               ? 0.0
                               : beta_next * std::abs(small(m - 1)) * tau;
        if (err > tol && tau > 1e-12) {
            tau *= 0.5;
            continue;
        }
        Eigen::VectorXcd next = Eigen::VectorXcd::Zero(dim);
        for (int j = 0; j < m; ++j) next += small(j) * v[j];
        next *= nrm / next.norm();  // exp(-iHt) preserves the input norm exactly
        cur = next;
        remaining -= tau;
        if (err < 0.1 * tol) tau *= 1.5;
    }
    return cur;
}

EdObservables observables_ed(const Eigen::VectorXcd& psi, const TruncatedBasis& basis) {
    EdObservables o{};
    o.bath_populations = Eigen::VectorXd::Zero(basis.bath_count());
    for (long i = 0; i < psi.size(); ++i) {
        const double w = std::norm(psi(i));
        if (w == 0.0) continue;
        const Digits d = decode(i, basis);
        o.n_left += w * d.nl;
        o.n_right += w * d.nr;
        o.sz_left += w * szl[d.q];
        o.sz_right += w * szr[d.q];
        for (int j = 0; j < basis.bath_count(); ++j)
            o.bath_populations(j) += w * d.nb[j];
    }
    o.z = o.n_left - o.n_right;
    const double total = o.n_left + o.n_right;
    o.z_norm = total < 1e-12 ? 0.0 : o.z / total;
    return o;
}

double energy_ed(const Eigen::SparseMatrix<double>& h, const Eigen::VectorXcd& psi) {
    return psi.dot(matvec(h, psi)).real();
}

double edge_occupancy(const Eigen::VectorXcd& psi, const TruncatedBasis& basis) {
    double worst = 0.0;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(2 + basis.bath_count());
    for (long i = 0; i < psi.size(); ++i) {
        const double w = std::norm(psi(i));
        if (w == 0.0) continue;
        const Digits d = decode(i, basis);
        if (d.nl == basis.n_max_l) acc(0) += w;
        if (d.nr == basis.n_max_r) acc(1) += w;
        for (int j = 0; j < basis.bath_count(); ++j)
            if (d.nb[j] == basis.n_max_bath) acc(2 + j) += w;
    }
    worst = acc.size() > 0 ? acc.maxCoeff() : 0.0;
    return worst;
}

std::vector<EdSample> propagate_sampled(const Eigen::SparseMatrix<double>& h,
                                        const Eigen::VectorXcd& psi0,
                                        const TruncatedBasis& basis,
                                        const std::vector<double>& times,
                                        double* max_leakage) {
    std::vector<EdSample> out;
    Eigen::VectorXcd psi = psi0;
    double leak = edge_occupancy(psi, basis);
    double t_cur = times.empty() ? 0.0 : times.front();
    for (size_t i = 0; i < times.size(); ++i) {
        if (i > 0) {
            const double dt = times[i] - t_cur;
            if (dt < 0) throw std::invalid_argument("propagate_sampled: times not increasing");
            psi = propagate_exact(h, psi, dt);
            t_cur = times[i];
        }
        leak = std::max(leak, edge_occupancy(psi, basis));
        out.push_back({t_cur, observables_ed(psi, basis)});
    }
    if (max_leakage) *max_leakage = leak;
    return out;
}

namespace {

double pick_observable(const TimeSeriesRecord& r, const std::string& name) {
    if (name == "n_left") return r.n_left;
    if (name == "n_right") return r.n_right;
    if (name == "z") return r.z;
    if (name == "z_norm") return r.z_norm;
    if (name == "sz_left") return r.sz_left;
    if (name == "sz_right") return r.sz_right;
    throw std::invalid_argument("compare_observables: unknown observable " + name);
}

double pick_observable(const EdObservables& o, const std::string& name) {
    if (name == "n_left") return o.n_left;
    if (name == "n_right") return o.n_right;
    if (name == "z") return o.z;
    if (name == "z_norm") return o.z_norm;
    if (name == "sz_left") return o.sz_left;
    if (name == "sz_right") return o.sz_right;
    throw std::invalid_argument("compare_observables: unknown observable " + name);
}

}  // namespace

ComparisonReport compare_observables(const std::vector<TimeSeriesRecord>& run,
                                     const std::vector<EdSample>& oracle,
                                     const std::vector<std::string>& names,
                                     double tolerance) {
    if (run.size() != oracle.size())
        throw std::invalid_argument("compare_observables: sample count mismatch");
    ComparisonReport rep;
    for (const auto& name : names) {
        ComparisonRow row{name, 0.0, 0.0, tolerance, true};
        for (size_t i = 0; i < run.size(); ++i) {
            if (std::abs(run[i].t - oracle[i].t) > 1e-9)
                throw std::invalid_argument("compare_observables: time grid mismatch");
            const double dev =
                std::abs(pick_observable(run[i], name) - pick_observable(oracle[i].obs, name));
            if (dev > row.max_abs_dev) {
                row.max_abs_dev = dev;
                row.t_worst = run[i].t;
            }
        }
        row.pass = row.max_abs_dev <= tolerance;
        rep.all_pass = rep.all_pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

void write_comparison_csv(const std::filesystem::path& file,
                          const ComparisonReport& report) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write comparison report: " + file.string());
    out << "observable,t_worst,max_abs_dev,tolerance,pass\n";
    char buf[256];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%d\n", r.observable.c_str(),
                      r.t_worst, r.max_abs_dev, r.tolerance, r.pass ? 1 : 0);
        out << buf;
    }
}

}  // namespace rabidimer
