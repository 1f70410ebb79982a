#ifndef DFIELD_FIELD_HPP
#define DFIELD_FIELD_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfield {

struct GridAxis {
    double lo = 0.0, hi = 1.0;
    int count = 2;
};

/// Tensor grid over the x-domain, n <= 3 axes, row-major node order
/// (axis 0 slowest). Node coordinates are lo + i*step.
class SpatialGrid {
public:
    SpatialGrid() = default;
    explicit SpatialGrid(std::vector<GridAxis> axes, std::size_t node_cap = 1'000'000);

    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t node_count() const { return nodes_; }
    const GridAxis& axis(int a) const { return axes_[a]; }
    double step(int a) const { return steps_[a]; }

    void node_point(std::size_t node, std::span<double> out) const;

    bool operator==(const SpatialGrid& other) const;

private:
    std::vector<GridAxis> axes_;
    std::vector<double> steps_;
    std::size_t nodes_ = 0;
};

/// One time slice of the field: grid samples of u (nodes x m) and of the
/// companion Z (nodes x m x d, absent on the terminal slice).
struct FieldSlice {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> z;
    double lip_estimate = 0.0;

    bool has_z() const { return !z.empty(); }
};

/// Max directional divided difference over cell corner pairs (axis edges
/// and cell diagonals), Euclidean norm over the m components. A lower
/// bound on the Lipschitz constant of the interpolant.
double slice_lipschitz_estimate(const SpatialGrid& grid, std::span<const double> u, int m);

/// Max over nodes of the Euclidean norm of the m-vector (or of any
/// comps-vector: also used for the Frobenius norm of z with comps = m*d).
double slice_max_norm(std::span<const double> values, int comps);

/// Multilinear interpolation inside the grid box; outside, linear
/// extension with the boundary cell's gradient along each clamped axis.
/// `values` holds comps values per node; `out` receives comps values.
void interpolate(const SpatialGrid& grid, std::span<const double> values, int comps,
                 std::span<const double> x, std::span<double> out);

struct BuildMetadata {
    std::vector<double> h_sequence;
    double margin = 0.0;
    int quad_order = 0;
    std::optional<double> cutoff_H;  // final radius, when a cutoff was active
    int cutoff_escalations = 0;
};

/// Time slices ordered by decreasing t starting at T, plus build metadata.
struct DecouplingFieldApprox {
    int n = 1, m = 1, d = 1;
    double T = 0.0;
    SpatialGrid grid;
    std::vector<FieldSlice> slices;  // slices.front().t == T, strictly decreasing
    BuildMetadata meta;

    double earliest_time() const { return slices.back().t; }
    const FieldSlice* find_slice(double t, double tol = 1e-12) const;

    void interpolate_u(const FieldSlice& s, std::span<const double> x, std::span<double> out) const {
        interpolate(grid, s.u, m, x, out);
    }
    void interpolate_z(const FieldSlice& s, std::span<const double> x, std::span<double> out) const {
        interpolate(grid, s.z, m * d, x, out);
    }
};

/// Glue a field on [s, t] (left) to one on [t, T] (right). The junction
/// slices must agree node-wise to 1e-12; throws JunctionMismatch.
DecouplingFieldApprox concatenate(const DecouplingFieldApprox& left,
                                  const DecouplingFieldApprox& right);

/// Binary snapshot (magic "DFLD", version, header, slices, CRC32).
void save_field(const DecouplingFieldApprox& field, const std::string& path);
DecouplingFieldApprox load_field(const std::string& path);

} // namespace dfield

#endif
