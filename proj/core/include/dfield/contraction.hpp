#ifndef DFIELD_CONTRACTION_HPP
#define DFIELD_CONTRACTION_HPP

#include <limits>

namespace dfield {

/// The three constants that drive the one-step contraction estimate.
struct LipschitzTriple {
    double L = 0.0;          // joint constant of mu, sigma, f in (x, y, z)
    double L_sigma_z = 0.0;  // constant of sigma in z
    double L_xi_x = 0.0;     // constant of the terminal condition in x
};

/// Contraction factor of the backward Picard map over an interval of
/// length h. Nondecreasing in h; gamma(0) = Lsz/(1+Lsz) v (Lsz*Lxi).
double gamma(double h, const LipschitzTriple& c);

/// Limit of gamma as h -> 0.
double gamma_limit(const LipschitzTriple& c);

/// Largest h with gamma(h) <= 1 - margin, found by bisection to relative
/// tolerance 1e-6. Returns +inf when gamma is constant below the target
/// (L == 0). Throws NoAdmissibleStep when gamma_limit >= 1 - margin.
double max_step(const LipschitzTriple& c, double margin);

/// Amplification constant K = (1 v (Lxi + L h)) / (1 - gamma_limit),
/// evaluated at step length h. >= 1 whenever defined.
double amplification_constant(const LipschitzTriple& c, double h);

/// Envelope L_terminal + C * h^(1/4) for the spatial Lipschitz constant
/// after stepping back by h.
double lipschitz_growth_bound(double L_terminal, double h, double C);

/// Bundle of derived step-size data for reporting.
struct ContractionData {
    LipschitzTriple triple;
    double margin = 0.1;
    double gamma0 = 0.0;   // gamma_limit
    double h_max = 0.0;    // may be +inf
    double K = 1.0;        // amplification at h_max (h term dropped when h_max is inf)
};

ContractionData contraction_data(const LipschitzTriple& c, double margin);

inline constexpr double kInfiniteStep = std::numeric_limits<double>::infinity();

} // namespace dfield

#endif
