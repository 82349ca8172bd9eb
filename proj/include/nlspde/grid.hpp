#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace nlspde {

/// Nodal values on the interior nodes of a Grid, in Grid index order.
using Field = Eigen::VectorXd;

/// Interval (d=1) or axis-aligned rectangle (d=2) with a uniform node count per axis.
struct DomainSpec {
  int dimension = 1;
  std::vector<double> extents{1.0};
  std::vector<int> nodes{255};  ///< interior nodes per axis; a single entry applies to every axis
};

/// A grid point on a face of the boundary. Corners are never listed, so the
/// outward normal is always a single coordinate direction.
struct BoundaryNode {
  std::array<double, 2> position{0.0, 0.0};
  int axis = 0;
  int side = -1;  ///< outward normal is side * e_axis
  Eigen::Index first = -1;   ///< nearest interior node along the inward normal
  Eigen::Index second = -1;  ///< next one inward, -1 if the axis has a single interior node
};

class Grid {
 public:
  Grid(int dimension, std::array<double, 2> extents, std::array<int, 2> counts);

  int dimension() const noexcept { return dimension_; }
  double extent(int axis) const { return extents_.at(axis); }
  int count(int axis) const { return counts_.at(axis); }
  double spacing(int axis) const { return spacing_.at(axis); }
  Eigen::Index size() const noexcept { return size_; }

  /// |D|, the Lebesgue measure of the continuum domain.
  double measure() const noexcept;
  /// Quadrature weight shared by every interior node (product of spacings).
  double weight() const noexcept { return weight_; }
  Field weights() const { return Field::Constant(size_, weight_); }

  Eigen::Index index(int ix, int iy = 0) const noexcept { return static_cast<Eigen::Index>(iy) * counts_[0] + ix; }
  /// Axis-wise integer position of node i, 0-based in the interior numbering.
  std::array<int, 2> position_index(Eigen::Index i) const noexcept;
  double coordinate(Eigen::Index i, int axis) const;
  double distance_to_boundary(Eigen::Index i) const;

  const std::vector<BoundaryNode>& boundary() const noexcept { return boundary_; }

  /// Indicator of D0 = {x : dist(x, dD) >= margin}. Throws ConfigError if empty.
  std::vector<bool> inner_subdomain(double margin) const;

 private:
  int dimension_;
  std::array<double, 2> extents_;
  std::array<int, 2> counts_;
  std::array<double, 2> spacing_;
  Eigen::Index size_;
  double weight_;
  std::vector<BoundaryNode> boundary_;
};

Grid build_grid(const DomainSpec& spec);

/// Sum of w_i * field_i over the interior nodes.
double quadrature(const Field& field, const Grid& grid);
/// Same sum restricted to the nodes flagged in `mask`.
double quadrature(const Field& field, const Grid& grid, const std::vector<bool>& mask);

/// Outward normal derivative at boundary()[boundary_index], from the one-sided
/// second-order stencil (-3 u_b + 4 u_1 - u_2) / 2h with u_b = 0.
double normal_derivative(const Field& field, const Grid& grid, std::size_t boundary_index);

/// CSV with one coordinate column per axis followed by the named value columns.
void write_field_csv(std::ostream& out, const Grid& grid, const std::vector<std::string>& names,
                     const std::vector<const Field*>& columns);

}  // namespace nlspde
