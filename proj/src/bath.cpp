#include "rabidimer/bath.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace rabidimer {

namespace {

// Gauss-Kronrod 15(7) nodes/weights on [-1, 1] (positive half; symmetric).
constexpr double kr_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kr_w[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double g7_w[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

// One Gauss-Kronrod panel; returns the K15 value and the |K15-G7| estimate.
void gk15(const std::function<double(double)>& f, double a, double b,
          double& value, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double fp = f(c + h * kr_x[i]);
        const double fm = (i < 7) ? f(c - h * kr_x[i]) : fp;
        const double s = (i < 7) ? fp + fm : fp;
        k += kr_w[i] * s;
        if (i % 2 == 1) g += g7_w[i / 2] * s;  // Gauss nodes are the odd Kronrod ones
    }
    value = h * k;
    err = std::abs(h * (k - g));
}

// Adaptive bisection to a relative tolerance; panels split until the summed
// error estimate is below rel_tol * |integral|.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
    struct Panel {
        double a, b, value, err;
    };
    std::vector<Panel> stack;
    double v, e;
    gk15(f, a, b, v, e);
    stack.push_back({a, b, v, e});
    double total = v, total_err = e;
    int splits = 0;
    while (total_err > rel_tol * std::max(std::abs(total), 1e-300) && splits < 2000) {
        // split the worst panel
        size_t worst = 0;
        for (size_t i = 1; i < stack.size(); ++i)
            if (stack[i].err > stack[worst].err) worst = i;
        Panel p = stack[worst];
        stack.erase(stack.begin() + static_cast<long>(worst));
        const double m = 0.5 * (p.a + p.b);
        Panel l{p.a, m, 0, 0}, r{m, p.b, 0, 0};
        gk15(f, l.a, l.b, l.value, l.err);
        gk15(f, r.a, r.b, r.value, r.err);
        total += l.value + r.value - p.value;
        total_err += l.err + r.err - p.err;
        stack.push_back(l);
        stack.push_back(r);
        ++splits;
    }
    return total;
}

constexpr double kQuadRelTol = 1e-10;

}  // namespace

double spectral_density(double omega, const ModelParams& p) {
    if (omega <= 0.0) throw std::domain_error("spectral_density: omega must be > 0");
    return 2.0 * p.alpha * std::pow(p.omega_c, 1.0 - p.s_exp) *
           std::pow(omega, p.s_exp) * std::exp(-omega / p.omega_c);
}

BathDiscretization discretize_bath(const ModelParams& p) {
    p.validate();
    BathDiscretization bd;
    const int n = p.n_bath;
    if (n == 0) {
        bd.edges = {};
        return bd;
    }
    const double lo = 1e-3 * p.omega_c;
    const double hi = p.omega_max;
    bd.edges.resize(n + 1);
    const double ratio = std::log(hi / lo);
    for (int k = 0; k <= n; ++k) bd.edges[k] = lo * std::exp(ratio * k / n);
    bd.edges[0] = lo;
    bd.edges[n] = hi;

    bd.omega.resize(n);
    bd.phi.resize(n);
    auto j = [&p](double w) { return spectral_density(w, p); };
    auto wj = [&p](double w) { return w * spectral_density(w, p); };
    for (int k = 0; k < n; ++k) {
        const double a = bd.edges[k], b = bd.edges[k + 1];
        const double weight = (p.alpha > 0.0) ? integrate(j, a, b, kQuadRelTol) : 0.0;
        if (weight > 0.0 && std::isfinite(weight)) {
            bd.phi[k] = std::sqrt(weight);
            bd.omega[k] = integrate(wj, a, b, kQuadRelTol) / weight;
            // centroid must stay inside the bin; guards rounding at the edges
            bd.omega[k] = std::min(std::max(bd.omega[k], a), b);
        } else {
            bd.phi[k] = 0.0;
            bd.omega[k] = std::sqrt(a * b);
        }
    }
    return bd;
}

}  // namespace rabidimer
