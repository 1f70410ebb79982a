#include "dfield/localstep.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>

#include "dfield/errors.hpp"
#include "dfield/parallel.hpp"

namespace dfield {

void project_ball(std::span<double> y, std::span<double> z, double H) {
    double norm2 = 0.0;
    for (double v : y)
        norm2 += v * v;
    for (double v : z)
        norm2 += v * v;
    if (norm2 <= H * H)
        return;  // passive: leave the values bit-identical
    double scale = H / std::sqrt(norm2);
    for (double& v : y)
        v *= scale;
    for (double& v : z)
        v *= scale;
}

namespace {

struct NodeWorkspace {
    std::vector<double> x;       // n
    std::vector<double> y, yc;   // m
    std::vector<double> z, zc;   // m*d
    std::vector<double> mu;      // n
    std::vector<double> sig;     // n*d
    std::vector<double> fv;      // m
    std::vector<double> xq;      // n
    std::vector<double> uq;      // m
    std::vector<double> ynew;    // m
    std::vector<double> znew;    // m*d

    NodeWorkspace(int n, int m, int d)
        : x(n), y(m), yc(m), z(m * d), zc(m * d), mu(n), sig(n * d), fv(m),
          xq(n), uq(m), ynew(m), znew(m * d) {}
};

} // namespace

FieldSlice backward_step(const SpatialGrid& grid, const FieldSlice& next, double t,
                         double h, const ProblemSpec& p, const QuadratureRule& rule,
                         const PicardConfig& cfg, std::optional<double> cutoff_H,
                         int n_threads, PicardTrace* trace) {
    if (!(h > 0.0))
        throw ConfigError("backward_step: h must be positive");
    if (rule.dim != p.d)
        throw ConfigError("backward_step: quadrature dimension mismatch");

    const int n = p.n, m = p.m, d = p.d;
    const std::size_t nodes = grid.node_count();
    const double sqrt_h = std::sqrt(h);

    FieldSlice out;
    out.t = t;
    out.u.resize(nodes * static_cast<std::size_t>(m));
    out.z.resize(nodes * static_cast<std::size_t>(m) * static_cast<std::size_t>(d));
    if (trace) {
        trace->node_deltas.assign(nodes, {});
        trace->max_iterations = 0;
    }

    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    parallel_chunks(nodes, n_threads, [&](std::size_t begin, std::size_t end) {
        NodeWorkspace ws(n, m, d);
        try {
            for (std::size_t node = begin; node != end; ++node) {
                if (failed.load(std::memory_order_relaxed))
                    return;
                grid.node_point(node, ws.x);

                // warm start: Y from the next slice's value, Z from its
                // stored companion when present
                interpolate(grid, next.u, m, ws.x, ws.y);
                if (next.has_z())
                    std::memcpy(ws.z.data(), next.z.data() + node * ws.z.size(),
                                ws.z.size() * sizeof(double));
                else
                    std::fill(ws.z.begin(), ws.z.end(), 0.0);

                bool converged = false;
                int iter = 0;
                for (; iter < cfg.max_iter; ++iter) {
                    std::memcpy(ws.yc.data(), ws.y.data(), ws.y.size() * sizeof(double));
                    std::memcpy(ws.zc.data(), ws.z.data(), ws.z.size() * sizeof(double));
                    if (cutoff_H)
                        project_ball(ws.yc, ws.zc, *cutoff_H);

                    for (int i = 0; i < n; ++i)
                        ws.mu[i] = p.mu[i].eval(t, ws.x, ws.yc, ws.zc);
                    bool sigma_zero = true;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < d; ++j) {
                            double s = p.sigma[i][j].eval(t, ws.x, ws.yc, ws.zc);
                            ws.sig[i * d + j] = s;
                            sigma_zero = sigma_zero && s == 0.0;
                        }
                    for (int j = 0; j < m; ++j)
                        ws.fv[j] = p.f[j].eval(t, ws.x, ws.yc, ws.zc);

                    if (sigma_zero) {
                        // deterministic dynamics: the rule collapses to its mean
                        for (int i = 0; i < n; ++i)
                            ws.xq[i] = ws.x[i] + ws.mu[i] * h;
                        interpolate(grid, next.u, m, ws.xq, ws.uq);
                        for (int j = 0; j < m; ++j)
                            ws.ynew[j] = ws.uq[j] - ws.fv[j] * h;
                        std::fill(ws.znew.begin(), ws.znew.end(), 0.0);
                    } else {
                        std::fill(ws.ynew.begin(), ws.ynew.end(), 0.0);
                        std::fill(ws.znew.begin(), ws.znew.end(), 0.0);
                        for (std::size_t q = 0; q < rule.count(); ++q) {
                            const double* w = rule.node(q);
                            const double wq = rule.weights[q];
                            for (int i = 0; i < n; ++i) {
                                double diff = 0.0;
                                for (int l = 0; l < d; ++l)
                                    diff += ws.sig[i * d + l] * w[l];
                                ws.xq[i] = ws.x[i] + ws.mu[i] * h + sqrt_h * diff;
                            }
                            interpolate(grid, next.u, m, ws.xq, ws.uq);
                            for (int j = 0; j < m; ++j) {
                                ws.ynew[j] += wq * ws.uq[j];
                                for (int l = 0; l < d; ++l)
                                    ws.znew[j * d + l] += wq * ws.uq[j] * w[l];
                            }
                        }
                        for (int j = 0; j < m; ++j)
                            ws.ynew[j] -= ws.fv[j] * h;
                        for (auto& v : ws.znew)
                            v /= sqrt_h;
                    }

                    const bool plain = cfg.damping == 1.0;
                    double delta = 0.0;
                    for (int j = 0; j < m; ++j) {
                        double upd = plain ? ws.ynew[j]
                                           : ws.y[j] + cfg.damping * (ws.ynew[j] - ws.y[j]);
                        delta = std::max(delta, std::abs(upd - ws.y[j]));
                        ws.y[j] = upd;
                    }
                    for (std::size_t k = 0; k < ws.z.size(); ++k) {
                        double upd = plain ? ws.znew[k]
                                           : ws.z[k] + cfg.damping * (ws.znew[k] - ws.z[k]);
                        delta = std::max(delta, std::abs(upd - ws.z[k]));
                        ws.z[k] = upd;
                    }
                    if (!std::isfinite(delta))
                        throw PicardDivergence("non-finite iterate at node " +
                                               std::to_string(node));
                    if (trace)
                        trace->node_deltas[node].push_back(delta);
                    if (delta <= cfg.tol) {
                        converged = true;
                        ++iter;
                        break;
                    }
                }
                if (!converged)
                    throw PicardDivergence("fixed point did not converge within " +
                                           std::to_string(cfg.max_iter) +
                                           " iterations at node " + std::to_string(node));
                if (trace) {
                    // max_iterations is reduced after the parallel section
                    trace->node_deltas[node].shrink_to_fit();
                }

                std::memcpy(out.u.data() + node * ws.y.size(), ws.y.data(),
                            ws.y.size() * sizeof(double));
                std::memcpy(out.z.data() + node * ws.z.size(), ws.z.data(),
                            ws.z.size() * sizeof(double));
            }
        } catch (...) {
            bool expected = false;
            if (failed.compare_exchange_strong(expected, true)) {
                std::lock_guard<std::mutex> lock(error_mutex);
                try {
                    throw;
                } catch (const std::exception& e) {
                    first_error = e.what();
                }
            }
        }
    });

    if (failed.load())
        throw PicardDivergence(first_error.empty() ? "backward_step failed" : first_error);

    if (trace)
        for (const auto& ds : trace->node_deltas)
            trace->max_iterations =
                std::max(trace->max_iterations, static_cast<int>(ds.size()));

    out.lip_estimate = slice_lipschitz_estimate(grid, out.u, m);
    return out;
}

} // namespace dfield
