#include "rabidimer/eom.hpp"

#include <cmath>

namespace rabidimer {

namespace {
constexpr double kResidualGate = 1e-6;
constexpr double kShiftBase = 1e-12;
constexpr double kShiftCap = 1e-8;
using detail::pair_terms;
}  // namespace

ParamIndex param_of_index(int flat, int branches, int bath_modes) {
    const int stride = 6 + bath_modes;
    if (flat < 0 || flat >= branches * stride)
        throw std::out_of_range("param_of_index: flat index out of range");
    return {flat / stride, flat % stride};
}

int index_of_param(ParamIndex idx, int branches, int bath_modes) {
    const int stride = 6 + bath_modes;
    if (idx.branch < 0 || idx.branch >= branches || idx.slot < 0 || idx.slot >= stride)
        throw std::out_of_range("index_of_param: parameter out of range");
    return idx.branch * stride + idx.slot;
}

void assemble(const VariationalState& st, const OverlapCache& cache,
              const ModelParams& p, const BathDiscretization& bath,
              EomSystem& out) {
    if (bath.size() != st.bath_modes())
        throw std::invalid_argument("assemble: bath size mismatch");
    const int m_br = st.branches(), nm = st.modes(), stride = 4 + nm;
    const int big_p = m_br * stride;

    out.branches = m_br;
    out.bath_modes = st.bath_modes();
    out.amps = st.amps;
    out.disp.resize(m_br, nm);
    out.disp.col(0) = st.mu;
    out.disp.col(1) = st.nu;
    out.disp.rightCols(st.bath_modes()) = st.eta;
    out.gram.resize(big_p, big_p);
    out.rhs.resize(big_p);
    out.rhs.setZero();

    const Eigen::Map<const Eigen::VectorXd> omega(bath.omega.data(), bath.size());
    const Eigen::Map<const Eigen::VectorXd> phi(bath.phi.data(), bath.size());

    for (int m = 0; m < m_br; ++m) {
        const Eigen::VectorXcd zm = out.disp.row(m).transpose();
        const Eigen::Vector4cd cm = st.amps.row(m).transpose();
        for (int n = 0; n < m_br; ++n) {
            const auto pt = pair_terms(st, cache, p, bath, m, n);
            const Eigen::VectorXcd zn = out.disp.row(n).transpose();
            const Eigen::Vector4cd cn = st.amps.row(n).transpose();
            const int rc = m * stride, cc = n * stride;

            auto amp_amp = out.gram.block(rc, cc, 4, 4);
            amp_amp.setZero();
            amp_amp.diagonal().setConstant(pt.s);
            out.gram.block(rc, cc + 4, 4, nm).noalias() = pt.s * (cn * zm.adjoint());
            out.gram.block(rc + 4, cc, nm, 4).noalias() = pt.s * (zn * cm.adjoint());
            auto disp_disp = out.gram.block(rc + 4, cc + 4, nm, nm);
            disp_disp.noalias() = (pt.s * pt.p) * (zn * zm.adjoint());
            disp_disp.diagonal().array() += pt.s * pt.p;

            // <T|H|D> contractions: amplitudes see the pair Hamiltonian
            // applied to c_n; each mode direction picks up the commutator
            // of its annihilator with H.
            out.rhs.segment(rc, 4) +=
                pt.s * detail::apply_pair_hamiltonian(pt, p.delta, cn);
            out.rhs(rc + 4) += pt.s * (st.mu(n) * pt.hbar +
                                       (p.omega0 * st.mu(n) - p.j_tunnel * st.nu(n)) * pt.p -
                                       p.g * pt.xl);
            out.rhs(rc + 5) += pt.s * (st.nu(n) * pt.hbar +
                                       (p.omega0 * st.nu(n) - p.j_tunnel * st.mu(n)) * pt.p -
                                       p.g * pt.xr);
            if (bath.size() > 0) {
                const auto eta_n = st.eta.row(n).transpose();
                out.rhs.segment(rc + 6, bath.size()) +=
                    pt.s * (pt.hbar * eta_n +
                            pt.p * omega.cast<cplx>().cwiseProduct(eta_n) +
                            pt.zz * phi.cast<cplx>());
            }
        }
    }
    out.rhs *= cplx(0.0, -1.0);  // i G v = h  ->  G v = -i h
}

EomSystem assemble(const VariationalState& st, const OverlapCache& cache,
                   const ModelParams& p, const BathDiscretization& bath) {
    EomSystem sys;
    assemble(st, cache, p, bath, sys);
    return sys;
}

namespace {

// v carries (amplitude velocity in the rescaled frame, plain dz/dt).  The
// physical amplitude derivative re-adds the norm flow of the coherent
// envelopes: dc/dt = u + c * sum_j Re(conj(z_j) dz_j/dt).
Eigen::VectorXcd frame_to_physical(const EomSystem& sys, const Eigen::VectorXcd& v) {
    const int nm = 2 + sys.bath_modes, stride = 4 + nm;
    Eigen::VectorXcd deriv = v;
    for (int b = 0; b < sys.branches; ++b) {
        const auto zdot = v.segment(b * stride + 4, nm);
        const double kappa =
            sys.disp.row(b).conjugate().cwiseProduct(zdot.transpose()).sum().real();
        deriv.segment(b * stride, 4) += kappa * sys.amps.row(b).transpose();
    }
    return deriv;
}

}  // namespace

Eigen::VectorXcd tangent_velocity(const EomSystem& sys, const Eigen::VectorXcd& deriv) {
    const int nm = 2 + sys.bath_modes, stride = 4 + nm;
    Eigen::VectorXcd v = deriv;
    for (int b = 0; b < sys.branches; ++b) {
        const auto zdot = deriv.segment(b * stride + 4, nm);
        const double kappa =
            sys.disp.row(b).conjugate().cwiseProduct(zdot.transpose()).sum().real();
        v.segment(b * stride, 4) -= kappa * sys.amps.row(b).transpose();
    }
    return v;
}

EomSolution solve(const EomSystem& sys) {
    const int big_p = sys.size();
    const double rhs_norm = sys.rhs.norm();
    EomSolution sol;
    if (rhs_norm == 0.0) {
        sol.deriv = Eigen::VectorXcd::Zero(big_p);
        sol.residual = 0.0;
        sol.shift = 0.0;
        sol.cond_estimate = 1.0;
        return sol;
    }
    const double scale = sys.gram.trace().real() / big_p;
    Eigen::MatrixXcd shifted(big_p, big_p);
    double eps = kShiftBase;
    while (true) {
        shifted = sys.gram;
        const double shift = eps * scale;
        shifted.diagonal().array() += shift;
        Eigen::LDLT<Eigen::MatrixXcd> ldlt(shifted);
        Eigen::VectorXcd v = ldlt.solve(sys.rhs);
        // One refinement pass: the shift biases each eigendirection by
        // O(shift/eigenvalue); re-solving on the residual cancels the bias to
        // second order where the gram is well conditioned.
        v += ldlt.solve(sys.rhs - sys.gram.selfadjointView<Eigen::Lower>() * v);
        const double residual =
            (sys.gram.selfadjointView<Eigen::Lower>() * v - sys.rhs).norm() / rhs_norm;
        if (residual <= kResidualGate || eps >= kShiftCap) {
            if (residual > kResidualGate)
                throw EomSolveError("EOM solve residual " + std::to_string(residual) +
                                    " above gate after shift escalation");
            const auto d = ldlt.vectorD();
            const double dmax = d.cwiseAbs().maxCoeff();
            const double dmin = d.cwiseAbs().minCoeff();
            sol.deriv = frame_to_physical(sys, v);
            sol.residual = residual;
            sol.shift = shift;
            sol.cond_estimate = dmax / std::max(dmin, 1e-300);
            return sol;
        }
        eps *= 10.0;
    }
}

double norm_rate(const EomSystem& sys, const Eigen::VectorXcd& deriv) {
    // d<D|D>/dt = 2 Re <D|dD/dt>, with <D| expanded over the amplitude rows
    // of the frame.
    const Eigen::VectorXcd v = tangent_velocity(sys, deriv);
    const Eigen::VectorXcd gv = sys.gram.selfadjointView<Eigen::Lower>() * v;
    const int stride = 6 + sys.bath_modes;
    cplx acc = 0.0;
    for (int b = 0; b < sys.branches; ++b)
        acc += sys.amps.row(b).conjugate().cwiseProduct(
                   gv.segment(b * stride, 4).transpose()).sum();
    return 2.0 * acc.real();
}

double energy_rate(const EomSystem& sys, const Eigen::VectorXcd& deriv) {
    // d<H>/dt = 2 Re <dD/dt|H|D> = 2 Re (v^dag h) with h = i rhs.
    const Eigen::VectorXcd v = tangent_velocity(sys, deriv);
    return -2.0 * (v.dot(sys.rhs)).imag();
}

}  // namespace rabidimer
