#include "dfield/contraction.hpp"

#include <algorithm>
#include <cmath>

#include "dfield/errors.hpp"

namespace dfield {

double gamma(double h, const LipschitzTriple& c) {
    const double L = c.L, Lsz = c.L_sigma_z, Lxi = c.L_xi_x;
    const double sh = std::sqrt(h);

    const double branch1 = 2.0 * L * (h + sh) + Lsz / (1.0 + Lsz) + L * sh;

    const double a = Lxi + L * h;
    const double branch2 = (1.0 + Lsz) * a * L * (h + sh)
                         + (a * L * (h + sh) + L * h)
                         + (a * (Lsz + L * sh) + L * sh);

    return std::max(branch1, branch2);
}

double gamma_limit(const LipschitzTriple& c) {
    return std::max(c.L_sigma_z / (1.0 + c.L_sigma_z), c.L_sigma_z * c.L_xi_x);
}

double max_step(const LipschitzTriple& c, double margin) {
    const double target = 1.0 - margin;
    if (gamma_limit(c) >= target)
        throw NoAdmissibleStep("gamma(0) >= 1 - margin: no positive step exists");
    if (c.L == 0.0)
        return kInfiniteStep;  // gamma is constant in h; caller caps at the horizon

    double hi = 1.0;
    while (gamma(hi, c) <= target) {
        hi *= 2.0;
        if (hi > 1e12)
            return kInfiniteStep;
    }
    double lo = 0.0;
    while (hi - lo > 1e-6 * hi) {
        double mid = 0.5 * (lo + hi);
        if (gamma(mid, c) <= target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double amplification_constant(const LipschitzTriple& c, double h) {
    double num = std::max(1.0, c.L_xi_x + (std::isfinite(h) ? c.L * h : 0.0));
    return num / (1.0 - gamma_limit(c));
}

double lipschitz_growth_bound(double L_terminal, double h, double C) {
    return L_terminal + C * std::pow(h, 0.25);
}

ContractionData contraction_data(const LipschitzTriple& c, double margin) {
    ContractionData d;
    d.triple = c;
    d.margin = margin;
    d.gamma0 = gamma_limit(c);
    d.h_max = max_step(c, margin);
    d.K = amplification_constant(c, d.h_max);
    return d;
}

} // namespace dfield
