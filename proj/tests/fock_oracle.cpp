#include "fock_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace fock_oracle {

namespace {

// e^{-|a|^2/2} a^n / sqrt(n!) for n = 0..nmax.
Eigen::VectorXcd coherent_column(cplx alpha, int nmax) {
    Eigen::VectorXcd c(nmax + 1);
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n <= nmax; ++n) c(n) = c(n - 1) * alpha / std::sqrt(double(n));
    return c;
}

constexpr double kSzL[4] = {1, 1, -1, -1};
constexpr double kSzR[4] = {1, -1, 1, -1};
constexpr int kFlipL[4] = {2, 3, 0, 1};
constexpr int kFlipR[4] = {1, 0, 3, 2};

}  // namespace

long FockSpace::dim() const {
    long d = 4L * (n_max_l + 1) * (n_max_r + 1);
    for (int j = 0; j < n_bath; ++j) d *= (n_max_bath + 1);
    return d;
}

long FockSpace::index(int q, int nl, int nr, const std::vector<int>& nb) const {
    long idx = nl;
    idx = idx * (n_max_r + 1) + nr;
    for (int j = 0; j < n_bath; ++j) idx = idx * (n_max_bath + 1) + nb[j];
    return idx * 4 + q;
}

void FockSpace::decode(long idx, int& q, int& nl, int& nr, std::vector<int>& nb) const {
    q = static_cast<int>(idx % 4);
    idx /= 4;
    nb.assign(n_bath, 0);
    for (int j = n_bath - 1; j >= 0; --j) {
        nb[j] = static_cast<int>(idx % (n_max_bath + 1));
        idx /= (n_max_bath + 1);
    }
    nr = static_cast<int>(idx % (n_max_r + 1));
    idx /= (n_max_r + 1);
    nl = static_cast<int>(idx);
}

Eigen::VectorXcd expand(const rabidimer::VariationalState& st, const FockSpace& fs) {
    if (fs.n_bath != st.bath_modes())
        throw std::invalid_argument("fock oracle: bath count mismatch");
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(fs.dim());
    std::vector<int> nb(fs.n_bath);
    for (int b = 0; b < st.branches(); ++b) {
        const auto cl = coherent_column(st.mu(b), fs.n_max_l);
        const auto cr = coherent_column(st.nu(b), fs.n_max_r);
        std::vector<Eigen::VectorXcd> cb;
        for (int j = 0; j < fs.n_bath; ++j)
            cb.push_back(coherent_column(st.eta(b, j), fs.n_max_bath));
        for (long i = 0; i < psi.size(); ++i) {
            int q, nl, nr;
            fs.decode(i, q, nl, nr, nb);
            cplx amp = st.amps(b, q) * cl(nl) * cr(nr);
            for (int j = 0; j < fs.n_bath; ++j) amp *= cb[j](nb[j]);
            psi(i) += amp;
        }
    }
    return psi;
}

Eigen::VectorXcd expand_branch_bosonic(const rabidimer::VariationalState& st,
                                       int branch, const FockSpace& fs) {
    const auto cl = coherent_column(st.mu(branch), fs.n_max_l);
    const auto cr = coherent_column(st.nu(branch), fs.n_max_r);
    std::vector<Eigen::VectorXcd> cb;
    for (int j = 0; j < fs.n_bath; ++j)
        cb.push_back(coherent_column(st.eta(branch, j), fs.n_max_bath));
    long d = fs.dim() / 4;
    Eigen::VectorXcd psi(d);
    std::vector<int> nb(fs.n_bath);
    for (long i = 0; i < d; ++i) {
        int q, nl, nr;
        fs.decode(i * 4, q, nl, nr, nb);  // q = 0 slice enumerates bosonic states
        cplx amp = cl(nl) * cr(nr);
        for (int j = 0; j < fs.n_bath; ++j) amp *= cb[j](nb[j]);
        psi(i) = amp;
    }
    return psi;
}

double norm_sq(const Eigen::VectorXcd& psi) { return psi.squaredNorm(); }

namespace {

template <typename Weight>
double diagonal_expectation(const Eigen::VectorXcd& psi, const FockSpace& fs,
                            Weight weight) {
    double acc = 0.0;
    std::vector<int> nb(fs.n_bath);
    for (long i = 0; i < psi.size(); ++i) {
        const double w = std::norm(psi(i));
        if (w == 0.0) continue;
        int q, nl, nr;
        fs.decode(i, q, nl, nr, nb);
        acc += w * weight(q, nl, nr, nb);
    }
    return acc;
}

}  // namespace

double n_left(const Eigen::VectorXcd& psi, const FockSpace& fs) {
    return diagonal_expectation(
        psi, fs, [](int, int nl, int, const std::vector<int>&) { return double(nl); });
}

double n_right(const Eigen::VectorXcd& psi, const FockSpace& fs) {
    return diagonal_expectation(
        psi, fs, [](int, int, int nr, const std::vector<int>&) { return double(nr); });
}

double sz_left(const Eigen::VectorXcd& psi, const FockSpace& fs) {
    return diagonal_expectation(
        psi, fs, [](int q, int, int, const std::vector<int>&) { return kSzL[q]; });
}

double sz_right(const Eigen::VectorXcd& psi, const FockSpace& fs) {
    return diagonal_expectation(
        psi, fs, [](int q, int, int, const std::vector<int>&) { return kSzR[q]; });
}

Eigen::VectorXd bath_pops(const Eigen::VectorXcd& psi, const FockSpace& fs) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(fs.n_bath);
    std::vector<int> nb(fs.n_bath);
    for (long i = 0; i < psi.size(); ++i) {
        const double w = std::norm(psi(i));
        if (w == 0.0) continue;
        int q, nl, nr;
        fs.decode(i, q, nl, nr, nb);
        for (int j = 0; j < fs.n_bath; ++j) out(j) += w * nb[j];
    }
    return out;
}

Eigen::VectorXcd apply_h(const Eigen::VectorXcd& psi, const FockSpace& fs,
                         const rabidimer::ModelParams& p,
                         const std::vector<double>& omega,
                         const std::vector<double>& phi) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
    std::vector<int> nb(fs.n_bath);
    for (long i = 0; i < psi.size(); ++i) {
        const cplx a = psi(i);
        if (a == 0.0) continue;
        int q, nl, nr;
        fs.decode(i, q, nl, nr, nb);

        double diag = 0.5 * p.delta * (kSzL[q] + kSzR[q]) + p.omega0 * (nl + nr);
        for (int j = 0; j < fs.n_bath; ++j) diag += omega[j] * nb[j];
        out(i) += diag * a;

        // -J (aL^dag aR + aR^dag aL)
        if (nl + 1 <= fs.n_max_l && nr - 1 >= 0)
            out(fs.index(q, nl + 1, nr - 1, nb)) +=
                -p.j_tunnel * std::sqrt((nl + 1.0) * nr) * a;
        if (nl - 1 >= 0 && nr + 1 <= fs.n_max_r)
            out(fs.index(q, nl - 1, nr + 1, nb)) +=
                -p.j_tunnel * std::sqrt(nl * (nr + 1.0)) * a;

        // -g (aL^dag + aL) sigma_x^L
        if (nl + 1 <= fs.n_max_l)
            out(fs.index(kFlipL[q], nl + 1, nr, nb)) += -p.g * std::sqrt(nl + 1.0) * a;
        if (nl - 1 >= 0)
            out(fs.index(kFlipL[q], nl - 1, nr, nb)) += -p.g * std::sqrt(double(nl)) * a;

        // -g (aR^dag + aR) sigma_x^R
        if (nr + 1 <= fs.n_max_r)
            out(fs.index(kFlipR[q], nl, nr + 1, nb)) += -p.g * std::sqrt(nr + 1.0) * a;
        if (nr - 1 >= 0)
            out(fs.index(kFlipR[q], nl, nr - 1, nb)) += -p.g * std::sqrt(double(nr)) * a;

        // phi_k (b_k^dag + b_k)(sz_L + sz_R)
        const double sz2 = kSzL[q] + kSzR[q];
        if (sz2 != 0.0) {
            for (int j = 0; j < fs.n_bath; ++j) {
                if (nb[j] + 1 <= fs.n_max_bath) {
                    ++nb[j];
                    out(fs.index(q, nl, nr, nb)) +=
                        phi[j] * std::sqrt(double(nb[j])) * sz2 * a;
                    --nb[j];
                }
                if (nb[j] - 1 >= 0) {
                    --nb[j];
                    out(fs.index(q, nl, nr, nb)) +=
                        phi[j] * std::sqrt(nb[j] + 1.0) * sz2 * a;
                    ++nb[j];
                }
            }
        }
    }
    return out;
}

double energy(const Eigen::VectorXcd& psi, const FockSpace& fs,
              const rabidimer::ModelParams& p, const std::vector<double>& omega,
              const std::vector<double>& phi) {
    return psi.dot(apply_h(psi, fs, p, omega, phi)).real();
}

}  // namespace fock_oracle
