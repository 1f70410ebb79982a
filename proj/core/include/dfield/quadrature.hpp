#ifndef DFIELD_QUADRATURE_HPP
#define DFIELD_QUADRATURE_HPP

#include <cstddef>
#include <vector>

namespace dfield {

/// Tensor-product Gauss-Hermite rule in probabilists' normalization:
/// integrates against the standard normal density on R^d, weights sum to 1.
struct QuadratureRule {
    int dim = 0;
    int order = 0;                 // per-axis point count
    std::vector<double> nodes;     // count*dim, row-major
    std::vector<double> weights;   // count

    std::size_t count() const { return weights.size(); }
    const double* node(std::size_t q) const { return nodes.data() + q * dim; }
};

/// Throws ConfigError when q^d exceeds size_cap or arguments are invalid.
QuadratureRule gauss_hermite(int d, int q, std::size_t size_cap = 1'000'000);

} // namespace dfield

#endif
