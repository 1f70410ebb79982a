#ifndef DFIELD_LOCALSTEP_HPP
#define DFIELD_LOCALSTEP_HPP

#include <optional>
#include <vector>

#include "dfield/field.hpp"
#include "dfield/problem.hpp"
#include "dfield/quadrature.hpp"

namespace dfield {

struct PicardConfig {
    double tol = 1e-10;    // on max(|dY|, |dZ|), max norm
    int max_iter = 200;
    double damping = 1.0;  // relaxation factor in (0, 1]
};

/// Optional diagnostics: per-node update deltas, for contraction-decay
/// checks. Only filled when requested; intended for small test grids.
struct PicardTrace {
    std::vector<std::vector<double>> node_deltas;
    int max_iterations = 0;
};

/// One contractive backward step from the slice `next` (at time t + h) to
/// time t. Per grid node, iterates the one-step discretization
///   X'(w) = x + mu(t,x,Y,Z) h + sigma(t,x,Y,Z) sqrt(h) w
///   Y     = sum_q w_q U(X'(w_q)) - f(t,x,Y,Z) h
///   Z     = sum_q w_q U(X'(w_q)) w_q^T / sqrt(h)
/// to its fixed point, warm-started from (U(x), Z of `next`). When
/// `cutoff_H` is set, the (Y, Z) arguments of the coefficients are first
/// projected onto the closed ball of that radius. When sigma vanishes at
/// the current iterate the rule collapses to its mean node.
///
/// Nodes are independent and processed as a parallel map; assembly order
/// is fixed, so results do not depend on the thread count.
/// Throws PicardDivergence when max_iter is exhausted or iterates turn
/// non-finite.
FieldSlice backward_step(const SpatialGrid& grid, const FieldSlice& next, double t,
                         double h, const ProblemSpec& p, const QuadratureRule& rule,
                         const PicardConfig& cfg,
                         std::optional<double> cutoff_H = {},
                         int n_threads = 1, PicardTrace* trace = nullptr);

/// Euclidean projection of the concatenated (y, z) vector onto the closed
/// ball of radius H. Identity inside the ball; Lipschitz constant 1.
void project_ball(std::span<double> y, std::span<double> z, double H);

} // namespace dfield

#endif
