#include "ellrig/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace ellrig {

Grid2D make_grid(double extent, int n) {
    if (n < 17) throw ValidationError("grid: need n >= 17 nodes per side");
    if (!(extent > 0)) throw ValidationError("grid: extent must be positive");
    return {extent, n};
}

GridMap::GridMap(const Grid2D& g, std::vector<double> u1, std::vector<double> u2)
    : grid_(g), u1_(std::move(u1)), u2_(std::move(u2)) {
    if (u1_.size() != g.nodes() || u2_.size() != g.nodes())
        throw ValidationError("grid map: node array size mismatch");
}

GridMap GridMap::from_function(
    const Grid2D& g, const std::function<std::pair<double, double>(double, double)>& fn) {
    std::vector<double> u1(g.nodes()), u2(g.nodes());
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const auto [a, b] = fn(g.x(i), g.y(j));
            u1[g.idx(i, j)] = a;
            u2[g.idx(i, j)] = b;
        }
    return GridMap(g, std::move(u1), std::move(u2));
}

void GridMap::set(int i, int j, double v1, double v2) {
    u1_[grid_.idx(i, j)] = v1;
    u2_[grid_.idx(i, j)] = v2;
    du_valid_ = false;
}

void GridMap::set_component(int comp, std::vector<double> values) {
    if (values.size() != grid_.nodes()) throw ValidationError("grid map: component size mismatch");
    (comp == 1 ? u1_ : u2_) = std::move(values);
    du_valid_ = false;
}

void GridMap::refresh() const {
    const int nc = grid_.cells_per_side();
    du_.resize(static_cast<std::size_t>(nc) * static_cast<std::size_t>(nc));
    const double h = grid_.h();
    auto grad = [&](const std::vector<double>& u, int i, int j) {
        const double s00 = u[grid_.idx(i, j)], s10 = u[grid_.idx(i + 1, j)];
        const double s01 = u[grid_.idx(i, j + 1)], s11 = u[grid_.idx(i + 1, j + 1)];
        return std::pair<double, double>{(s10 + s11 - s00 - s01) / (2 * h),
                                         (s01 + s11 - s00 - s10) / (2 * h)};
    };
    for (int cj = 0; cj < nc; ++cj)
        for (int ci = 0; ci < nc; ++ci) {
            const auto [gx1, gy1] = grad(u1_, ci, cj);
            const auto [gx2, gy2] = grad(u2_, ci, cj);
            du_[static_cast<std::size_t>(cj) * static_cast<std::size_t>(nc) +
                static_cast<std::size_t>(ci)] = {gx1, gy1, gx2, gy2};
        }
    du_valid_ = true;
}

Mat2 GridMap::du(int ci, int cj) const {
    if (!du_valid_) refresh();
    const int nc = grid_.cells_per_side();
    return du_[static_cast<std::size_t>(cj) * static_cast<std::size_t>(nc) +
               static_cast<std::size_t>(ci)];
}

const std::vector<Mat2>& GridMap::du_cells() const {
    if (!du_valid_) refresh();
    return du_;
}

std::pair<Mat2, std::size_t> GridMap::mean_du(double frac) const {
    const int nc = grid_.cells_per_side();
    const double lim = frac * grid_.extent;
    Mat2 acc{};
    std::size_t count = 0;
    for (int cj = 0; cj < nc; ++cj)
        for (int ci = 0; ci < nc; ++ci) {
            const double cx = grid_.x(ci) + 0.5 * grid_.h();
            const double cy = grid_.y(cj) + 0.5 * grid_.h();
            if (std::abs(cx) <= lim && std::abs(cy) <= lim) {
                acc = acc + du(ci, cj);
                ++count;
            }
        }
    if (count) acc = (1.0 / static_cast<double>(count)) * acc;
    return {acc, count};
}

void save_grid_map(const std::string& path, const GridMap& m) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write grid map '" + path + "'");
    char buf[128];
    std::snprintf(buf, sizeof buf, "gridmap v1\n%.17g\n%d\n", m.grid().extent, m.grid().n);
    out << buf;
    for (std::size_t idx = 0; idx < m.grid().nodes(); ++idx) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", m.u1()[idx], m.u2()[idx]);
        out << buf;
    }
}

GridMap load_grid_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open grid map '" + path + "'");
    std::string header;
    std::getline(in, header);
    if (header != "gridmap v1")
        throw ValidationError("grid map '" + path + "': bad header '" + header + "'");
    double extent;
    int n;
    if (!(in >> extent >> n) || n < 2)
        throw ValidationError("grid map '" + path + "': bad extent / n");
    const Grid2D g{extent, n};
    std::vector<double> u1(g.nodes()), u2(g.nodes());
    for (std::size_t idx = 0; idx < g.nodes(); ++idx)
        if (!(in >> u1[idx] >> u2[idx]))
            throw ValidationError("grid map '" + path + "': truncated data");
    return GridMap(g, std::move(u1), std::move(u2));
}

}  // namespace ellrig
