#include "nlspde/grid.hpp"

#include "nlspde/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace nlspde {

Grid::Grid(int dimension, std::array<double, 2> extents, std::array<int, 2> counts)
    : dimension_(dimension), extents_(extents), counts_(counts), spacing_{0.0, 0.0} {
  if (dimension != 1 && dimension != 2) {
    throw ConfigError("dimension must be 1 or 2, got " + std::to_string(dimension));
  }
  if (dimension == 1) {
    extents_[1] = 1.0;
    counts_[1] = 1;
  }
  for (int a = 0; a < dimension; ++a) {
    if (!(extents_[a] > 0.0) || !std::isfinite(extents_[a])) {
      throw ConfigError("extent along axis " + std::to_string(a) + " must be positive");
    }
    if (counts_[a] < 1) {
      throw ConfigError("empty interior: axis " + std::to_string(a) + " has " +
                        std::to_string(counts_[a]) + " interior nodes");
    }
    spacing_[a] = extents_[a] / (counts_[a] + 1);
  }
  size_ = static_cast<Eigen::Index>(counts_[0]) * counts_[1];
  weight_ = dimension == 1 ? spacing_[0] : spacing_[0] * spacing_[1];

  // Face nodes only: corners have no unique outward normal.
  if (dimension == 1) {
    const int n = counts_[0];
    boundary_.push_back({{0.0, 0.0}, 0, -1, 0, n > 1 ? 1 : -1});
    boundary_.push_back({{extents_[0], 0.0}, 0, +1, n - 1, n > 1 ? n - 2 : -1});
  } else {
    const int nx = counts_[0];
    const int ny = counts_[1];
    for (int iy = 0; iy < ny; ++iy) {
      const double y = (iy + 1) * spacing_[1];
      boundary_.push_back({{0.0, y}, 0, -1, index(0, iy), nx > 1 ? index(1, iy) : -1});
      boundary_.push_back({{extents_[0], y}, 0, +1, index(nx - 1, iy), nx > 1 ? index(nx - 2, iy) : -1});
    }
    for (int ix = 0; ix < nx; ++ix) {
      const double x = (ix + 1) * spacing_[0];
      boundary_.push_back({{x, 0.0}, 1, -1, index(ix, 0), ny > 1 ? index(ix, 1) : -1});
      boundary_.push_back({{x, extents_[1]}, 1, +1, index(ix, ny - 1), ny > 1 ? index(ix, ny - 2) : -1});
    }
  }
}

double Grid::measure() const noexcept {
  return dimension_ == 1 ? extents_[0] : extents_[0] * extents_[1];
}

std::array<int, 2> Grid::position_index(Eigen::Index i) const noexcept {
  return {static_cast<int>(i % counts_[0]), static_cast<int>(i / counts_[0])};
}

double Grid::coordinate(Eigen::Index i, int axis) const {
  if (axis < 0 || axis >= dimension_) throw ShapeError("axis out of range");
  if (i < 0 || i >= size_) throw ShapeError("node index out of range");
  return (position_index(i)[axis] + 1) * spacing_[axis];
}

double Grid::distance_to_boundary(Eigen::Index i) const {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dimension_; ++a) {
    const double x = coordinate(i, a);
    d = std::min({d, x, extents_[a] - x});
  }
  return d;
}

std::vector<bool> Grid::inner_subdomain(double margin) const {
  std::vector<bool> mask(static_cast<std::size_t>(size_));
  bool any = false;
  // Relative slack so that nodes sitting exactly at the margin are included.
  const double slack = 1e-12 * std::max(extents_[0], extents_[1]);
  for (Eigen::Index i = 0; i < size_; ++i) {
    mask[static_cast<std::size_t>(i)] = distance_to_boundary(i) >= margin - slack;
    any = any || mask[static_cast<std::size_t>(i)];
  }
  if (!any) {
    std::ostringstream msg;
    msg << "inner subdomain D0 is empty for margin " << margin;
    throw ConfigError(msg.str());
  }
  return mask;
}

Grid build_grid(const DomainSpec& spec) {
  if (spec.dimension != 1 && spec.dimension != 2) {
    throw ConfigError("dimension must be 1 or 2, got " + std::to_string(spec.dimension));
  }
  const auto axes = static_cast<std::size_t>(spec.dimension);
  if (spec.extents.size() != axes) {
    throw ConfigError("expected " + std::to_string(axes) + " extents, got " + std::to_string(spec.extents.size()));
  }
  if (spec.nodes.size() != 1 && spec.nodes.size() != axes) {
    throw ConfigError("nodes must have 1 or " + std::to_string(axes) + " entries");
  }
  std::array<double, 2> extents{spec.extents[0], axes > 1 ? spec.extents[1] : 1.0};
  std::array<int, 2> counts{spec.nodes[0], spec.nodes.size() > 1 ? spec.nodes[1] : spec.nodes[0]};
  return Grid(spec.dimension, extents, counts);
}

double quadrature(const Field& field, const Grid& grid) {
  if (field.size() != grid.size()) {
    throw ShapeError("field has " + std::to_string(field.size()) + " values, grid has " +
                     std::to_string(grid.size()) + " interior nodes");
  }
  return grid.weight() * field.sum();
}

double quadrature(const Field& field, const Grid& grid, const std::vector<bool>& mask) {
  if (field.size() != grid.size() || mask.size() != static_cast<std::size_t>(grid.size())) {
    throw ShapeError("field/mask size does not match grid");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) s += field[i];
  }
  return grid.weight() * s;
}

double normal_derivative(const Field& field, const Grid& grid, std::size_t boundary_index) {
  if (field.size() != grid.size()) throw ShapeError("field size does not match grid");
  if (boundary_index >= grid.boundary().size()) {
    throw ConfigError("node " + std::to_string(boundary_index) + " is not a boundary node");
  }
  const BoundaryNode& b = grid.boundary()[boundary_index];
  const double h = grid.spacing(b.axis);
  const double u1 = field[b.first];
  if (b.second < 0) {
    return -u1 / h;
  }
  const double u2 = field[b.second];
  // Inward derivative (-3*0 + 4 u1 - u2) / 2h; the outward one flips sign.
  return -(4.0 * u1 - u2) / (2.0 * h);
}

void write_field_csv(std::ostream& out, const Grid& grid, const std::vector<std::string>& names,
                     const std::vector<const Field*>& columns) {
  if (names.size() != columns.size()) throw ShapeError("column names and values differ in count");
  for (const Field* c : columns) {
    if (c == nullptr || c->size() != grid.size()) throw ShapeError("CSV column size does not match grid");
  }
  static const char* axis_names[] = {"x", "y"};
  for (int a = 0; a < grid.dimension(); ++a) out << (a ? "," : "") << axis_names[a];
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    for (int a = 0; a < grid.dimension(); ++a) out << (a ? "," : "") << grid.coordinate(i, a);
    for (const Field* c : columns) out << ',' << (*c)[i];
    out << '\n';
  }
}

}  // namespace nlspde
