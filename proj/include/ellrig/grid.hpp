#pragma once

// Square-lattice maps with Dirichlet boundaries. Gradients are cached
// cell-centered; the PDE solver additionally uses the two per-cell triangle
// gradients (criss-cross split) so discrete integration by parts is exact.

#include <functional>
#include <string>
#include <vector>

#include "ellrig/errors.hpp"
#include "ellrig/mat.hpp"

namespace ellrig {

struct Grid2D {
    double extent = 1.0;  // [-extent, extent]^2
    int n = 65;           // nodes per side

    double h() const { return 2.0 * extent / (n - 1); }
    double x(int i) const { return -extent + h() * i; }
    double y(int j) const { return -extent + h() * j; }
    std::size_t nodes() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
               static_cast<std::size_t>(i);
    }
    int cells_per_side() const { return n - 1; }
    bool boundary(int i, int j) const { return i == 0 || j == 0 || i == n - 1 || j == n - 1; }
};

Grid2D make_grid(double extent, int n);  // validates n >= 17

class GridMap {
  public:
    GridMap() = default;
    GridMap(const Grid2D& g, std::vector<double> u1, std::vector<double> u2);

    /// Samples (u1, u2) = fn(x, y) at the nodes.
    static GridMap from_function(const Grid2D& g,
                                 const std::function<std::pair<double, double>(double, double)>& fn);

    const Grid2D& grid() const { return grid_; }
    const std::vector<double>& u1() const { return u1_; }
    const std::vector<double>& u2() const { return u2_; }

    /// Mutation invalidates the gradient cache.
    void set(int i, int j, double v1, double v2);
    void set_component(int comp, std::vector<double> values);

    double value1(int i, int j) const { return u1_[grid_.idx(i, j)]; }
    double value2(int i, int j) const { return u2_[grid_.idx(i, j)]; }

    /// Cell-centered gradient: row1 = grad u1, row2 = grad u2.
    Mat2 du(int ci, int cj) const;
    const std::vector<Mat2>& du_cells() const;  // (n-1)^2 row-major

    /// Mean of the cell gradients over cells whose centers lie in
    /// [-frac*extent, frac*extent]^2, plus the matching cell count.
    std::pair<Mat2, std::size_t> mean_du(double frac) const;

  private:
    void refresh() const;

    Grid2D grid_;
    std::vector<double> u1_, u2_;
    mutable std::vector<Mat2> du_;
    mutable bool du_valid_ = false;
};

/// `gridmap v1` text format: header, extent, n, then row-major "u1 u2".
void save_grid_map(const std::string& path, const GridMap& m);
GridMap load_grid_map(const std::string& path);

}  // namespace ellrig
