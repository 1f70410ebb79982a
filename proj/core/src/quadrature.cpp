#include "dfield/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "dfield/errors.hpp"

namespace dfield {

namespace {

// Orthonormal probabilists' Hermite value p_q(x) (same roots as He_q).
// Orthonormal recurrence keeps magnitudes tame up to large q.
double herm_orthonormal(int q, double x) {
    double pm = 0.0, p = 1.0;
    for (int k = 0; k < q; ++k) {
        double pn = (x * p - std::sqrt(static_cast<double>(k)) * pm) /
                    std::sqrt(static_cast<double>(k + 1));
        pm = p;
        p = pn;
    }
    return p;
}

// Christoffel number for a root x of p_q: w = 1 / sum_{k<q} p_k(x)^2.
// Total mass is exactly mu_0 = 1.
double christoffel(int q, double x) {
    double pm = 0.0, p = 1.0, s = 1.0;
    for (int k = 0; k + 1 < q; ++k) {
        double pn = (x * p - std::sqrt(static_cast<double>(k)) * pm) /
                    std::sqrt(static_cast<double>(k + 1));
        pm = p;
        p = pn;
        s += p * p;
    }
    return 1.0 / s;
}

// Nonnegative roots of He_q by bracketed bisection plus Newton polish.
std::vector<double> positive_roots(int q) {
    std::vector<double> roots;
    int want = q / 2;
    if (want == 0)
        return roots;

    double upper = std::sqrt(4.0 * q + 2.0) + 1.0;
    double lo = (q % 2 == 1) ? 1e-8 : 0.0;  // skip the root at 0 for odd q
    int scan = 200 * q;
    double prev_x = lo, prev_v = herm_orthonormal(q, lo);
    for (int i = 1; i <= scan && static_cast<int>(roots.size()) < want; ++i) {
        double x = lo + (upper - lo) * i / scan;
        double v = herm_orthonormal(q, x);
        if (prev_v == 0.0) {
            prev_x = x;
            prev_v = v;
            continue;  // exact root already recorded at the previous point
        }
        if (v == 0.0) {
            roots.push_back(x);
        } else if ((prev_v < 0) != (v < 0)) {
            double a = prev_x, b = x, fa = prev_v;
            for (int it = 0; it < 100; ++it) {
                double mid = 0.5 * (a + b);
                double fm = herm_orthonormal(q, mid);
                if (fm == 0.0) { a = b = mid; break; }
                if ((fm < 0) == (fa < 0)) { a = mid; fa = fm; }
                else b = mid;
            }
            double r = 0.5 * (a + b);
            // Newton polish; p_q' = sqrt(q) p_{q-1}
            for (int it = 0; it < 4; ++it) {
                double pq = herm_orthonormal(q, r);
                double dpq = std::sqrt(static_cast<double>(q)) * herm_orthonormal(q - 1, r);
                if (dpq != 0.0)
                    r -= pq / dpq;
            }
            roots.push_back(r);
        }
        prev_x = x;
        prev_v = v;
    }
    if (static_cast<int>(roots.size()) != want)
        throw std::logic_error("gauss_hermite: root search failed");
    return roots;
}

} // namespace

QuadratureRule gauss_hermite(int d, int q, std::size_t size_cap) {
    if (d < 1 || d > 8)
        throw ConfigError("gauss_hermite: dimension must be in [1, 8]");
    if (q < 1 || q > 64)
        throw ConfigError("gauss_hermite: order must be in [1, 64]");

    std::size_t count = 1;
    for (int i = 0; i < d; ++i) {
        count *= static_cast<std::size_t>(q);
        if (count > size_cap)
            throw ConfigError("gauss_hermite: q^d exceeds the size cap");
    }

    // 1-D rule, symmetric by construction: mirrored nodes share one weight value
    std::vector<double> x1(q), w1(q);
    std::vector<double> pos = positive_roots(q);
    int idx = 0;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it)
        x1[idx++] = -*it;
    if (q % 2 == 1)
        x1[idx++] = 0.0;
    for (double r : pos)
        x1[idx++] = r;
    for (int i = 0; i < q; ++i)
        w1[i] = christoffel(q, x1[i]);
    for (int i = 0; i < q / 2; ++i) {  // enforce exact weight symmetry
        double w = 0.5 * (w1[i] + w1[q - 1 - i]);
        w1[i] = w1[q - 1 - i] = w;
    }

    QuadratureRule rule;
    rule.dim = d;
    rule.order = q;
    rule.nodes.resize(count * d);
    rule.weights.resize(count);

    std::vector<int> od(d, 0);
    for (std::size_t c = 0; c < count; ++c) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            rule.nodes[c * d + a] = x1[od[a]];
            w *= w1[od[a]];
        }
        rule.weights[c] = w;
        for (int a = d - 1; a >= 0; --a) {
            if (++od[a] < q)
                break;
            od[a] = 0;
        }
    }
    return rule;
}

} // namespace dfield
