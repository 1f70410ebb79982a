#include "dfield/field.hpp"

#include <algorithm>
#include <cmath>

#include "dfield/errors.hpp"

namespace dfield {

SpatialGrid::SpatialGrid(std::vector<GridAxis> axes, std::size_t node_cap)
    : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > 3)
        throw ConfigError("grid must have 1..3 axes");
    nodes_ = 1;
    for (const auto& a : axes_) {
        if (a.count < 2)
            throw ConfigError("each grid axis needs at least 2 nodes");
        if (!(a.lo < a.hi))
            throw ConfigError("grid axis must have lo < hi");
        nodes_ *= static_cast<std::size_t>(a.count);
        if (nodes_ > node_cap)
            throw ConfigError("grid node count exceeds the configured cap");
        steps_.push_back((a.hi - a.lo) / (a.count - 1));
    }
}

void SpatialGrid::node_point(std::size_t node, std::span<double> out) const {
    for (int a = dim() - 1; a >= 0; --a) {
        std::size_t c = static_cast<std::size_t>(axes_[a].count);
        out[a] = axes_[a].lo + static_cast<double>(node % c) * steps_[a];
        node /= c;
    }
}

bool SpatialGrid::operator==(const SpatialGrid& other) const {
    if (axes_.size() != other.axes_.size())
        return false;
    for (std::size_t a = 0; a < axes_.size(); ++a)
        if (axes_[a].lo != other.axes_[a].lo || axes_[a].hi != other.axes_[a].hi ||
            axes_[a].count != other.axes_[a].count)
            return false;
    return true;
}

namespace {

struct CellLocator {
    int ci[3];        // cell index per axis
    double theta[3];  // local coordinate in [0, 1] of the clamped point
    double dx[3];     // outside offset (0 when inside)
    std::size_t corner_stride[3];
};

void locate(const SpatialGrid& g, std::span<const double> x, CellLocator& loc) {
    int n = g.dim();
    std::size_t stride = 1;
    for (int a = n - 1; a >= 0; --a) {
        const GridAxis& ax = g.axis(a);
        double xa = std::clamp(x[a], ax.lo, ax.hi);
        loc.dx[a] = x[a] - xa;
        int ci = static_cast<int>(std::floor((xa - ax.lo) / g.step(a)));
        ci = std::clamp(ci, 0, ax.count - 2);
        loc.ci[a] = ci;
        loc.theta[a] = (xa - (ax.lo + ci * g.step(a))) / g.step(a);
        loc.corner_stride[a] = stride;
        stride *= static_cast<std::size_t>(ax.count);
    }
}

} // namespace

void interpolate(const SpatialGrid& grid, std::span<const double> values, int comps,
                 std::span<const double> x, std::span<double> out) {
    const int n = grid.dim();
    CellLocator loc;
    locate(grid, x, loc);

    std::size_t base = 0;
    for (int a = 0; a < n; ++a)
        base += static_cast<std::size_t>(loc.ci[a]) * loc.corner_stride[a];

    for (int k = 0; k < comps; ++k)
        out[k] = 0.0;

    const int corners = 1 << n;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t node = base;
        for (int a = 0; a < n; ++a) {
            if (c & (1 << a)) {
                w *= loc.theta[a];
                node += loc.corner_stride[a];
            } else {
                w *= 1.0 - loc.theta[a];
            }
        }
        if (w == 0.0)
            continue;
        const double* v = values.data() + node * comps;
        for (int k = 0; k < comps; ++k)
            out[k] += w * v[k];
    }

    // gradient-continuing extension along every clamped axis
    for (int a = 0; a < n; ++a) {
        if (loc.dx[a] == 0.0)
            continue;
        const double scale = loc.dx[a] / grid.step(a);
        for (int c = 0; c < corners; ++c) {
            double w = (c & (1 << a)) ? 1.0 : -1.0;
            std::size_t node = base;
            for (int b = 0; b < n; ++b) {
                if (c & (1 << b))
                    node += loc.corner_stride[b];
                if (b == a)
                    continue;
                w *= (c & (1 << b)) ? loc.theta[b] : 1.0 - loc.theta[b];
            }
            if (w == 0.0)
                continue;
            const double* v = values.data() + node * comps;
            for (int k = 0; k < comps; ++k)
                out[k] += scale * w * v[k];
        }
    }
}

double slice_lipschitz_estimate(const SpatialGrid& grid, std::span<const double> u, int m) {
    const int n = grid.dim();
    const int corners = 1 << n;

    std::size_t cell_count = 1;
    int counts[3] = {1, 1, 1};
    for (int a = 0; a < n; ++a) {
        counts[a] = grid.axis(a).count - 1;
        cell_count *= static_cast<std::size_t>(counts[a]);
    }

    // strides of the node lattice
    std::size_t stride[3] = {0, 0, 0};
    {
        std::size_t s = 1;
        for (int a = n - 1; a >= 0; --a) {
            stride[a] = s;
            s *= static_cast<std::size_t>(grid.axis(a).count);
        }
    }

    double best = 0.0;
    for (std::size_t cell = 0; cell < cell_count; ++cell) {
        std::size_t rem = cell;
        std::size_t base = 0;
        for (int a = n - 1; a >= 0; --a) {
            base += (rem % counts[a]) * stride[a];
            rem /= counts[a];
        }
        for (int c1 = 0; c1 < corners; ++c1) {
            for (int c2 = c1 + 1; c2 < corners; ++c2) {
                int diff = c1 ^ c2;
                double dist2 = 0.0;
                std::size_t n1 = base, n2 = base;
                for (int a = 0; a < n; ++a) {
                    if (c1 & (1 << a))
                        n1 += stride[a];
                    if (c2 & (1 << a))
                        n2 += stride[a];
                    if (diff & (1 << a))
                        dist2 += grid.step(a) * grid.step(a);
                }
                double du2 = 0.0;
                const double* p1 = u.data() + n1 * m;
                const double* p2 = u.data() + n2 * m;
                for (int k = 0; k < m; ++k) {
                    double dv = p1[k] - p2[k];
                    du2 += dv * dv;
                }
                best = std::max(best, du2 / dist2);
            }
        }
    }
    return std::sqrt(best);
}

double slice_max_norm(std::span<const double> values, int comps) {
    double best = 0.0;
    for (std::size_t i = 0; i + comps <= values.size(); i += comps) {
        double s = 0.0;
        for (int k = 0; k < comps; ++k)
            s += values[i + k] * values[i + k];
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

const FieldSlice* DecouplingFieldApprox::find_slice(double t, double tol) const {
    for (const auto& s : slices)
        if (std::abs(s.t - t) <= tol)
            return &s;
    return nullptr;
}

DecouplingFieldApprox concatenate(const DecouplingFieldApprox& left,
                                  const DecouplingFieldApprox& right) {
    if (!(left.grid == right.grid) || left.n != right.n || left.m != right.m ||
        left.d != right.d)
        throw JunctionMismatch("concatenate: grid or dimensions differ");

    const FieldSlice& ltop = left.slices.front();     // left's terminal slice
    const FieldSlice& rbot = right.slices.back();     // right's earliest slice
    if (std::abs(ltop.t - rbot.t) > 1e-12)
        throw JunctionMismatch("concatenate: junction times differ");
    if (ltop.u.size() != rbot.u.size())
        throw JunctionMismatch("concatenate: junction slice sizes differ");
    for (std::size_t i = 0; i < ltop.u.size(); ++i)
        if (std::abs(ltop.u[i] - rbot.u[i]) > 1e-12)
            throw JunctionMismatch("concatenate: junction slices disagree beyond 1e-12");

    if (left.slices.size() == 1)  // zero-length left interval
        return right;

    DecouplingFieldApprox out = right;
    out.slices.insert(out.slices.end(), left.slices.begin() + 1, left.slices.end());
    out.meta.h_sequence.insert(out.meta.h_sequence.end(),
                               left.meta.h_sequence.begin(), left.meta.h_sequence.end());
    out.meta.cutoff_escalations += left.meta.cutoff_escalations;
    if (left.meta.cutoff_H)
        out.meta.cutoff_H = left.meta.cutoff_H;
    return out;
}

} // namespace dfield
