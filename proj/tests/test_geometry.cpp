#include "nlspde/error.hpp"
#include "nlspde/grid.hpp"
#include "nlspde/spectral.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <chrono>
#include <sstream>

using namespace nlspde;

namespace {

Grid line(int n, double length = 1.0) { return build_grid({1, {length}, {n}}); }

}  // namespace

TEST_CASE("grid spacing and node counts") {
  const Grid g = line(4);
  CHECK(g.size() == 4);
  CHECK(g.spacing(0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(g.coordinate(0, 0) == doctest::Approx(0.2));
  CHECK(g.coordinate(3, 0) == doctest::Approx(0.8));

  const Grid sq = build_grid({2, {1.0, 1.0}, {3}});
  CHECK(sq.size() == 9);
  CHECK(sq.weight() == doctest::Approx(0.0625));
}

TEST_CASE("grid rejects bad domains") {
  CHECK_THROWS_WITH_AS(line(0), doctest::Contains("empty interior"), ConfigError);
  CHECK_THROWS_AS(build_grid({1, {-1.0}, {4}}), ConfigError);
  CHECK_THROWS_AS(build_grid({3, {1.0, 1.0, 1.0}, {4}}), ConfigError);
}

TEST_CASE("quadrature weights sum to |D| N/(N+1) and converge to |D|") {
  for (int n : {1, 7, 63, 255}) {
    const Grid g = line(n, 2.0);
    const Field one = Field::Ones(g.size());
    CHECK(quadrature(one, g) == doctest::Approx(2.0 * n / (n + 1.0)).epsilon(1e-13));
  }
  const Grid fine = line(4095, 2.0);
  CHECK(std::abs(quadrature(Field::Ones(fine.size()), fine) - 2.0) < 1e-3);
}

TEST_CASE("interior nodes lie strictly inside and boundary nodes carry one unit normal") {
  const Grid g = build_grid({2, {1.0, 2.0}, {3, 5}});
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    CHECK(g.distance_to_boundary(i) > 0.0);
  }
  // Faces only: 2 * 3 nodes on the y-faces plus 2 * 5 on the x-faces.
  CHECK(g.boundary().size() == 16u);
  for (const auto& b : g.boundary()) {
    CHECK((b.side == 1 || b.side == -1));
    CHECK((b.axis == 0 || b.axis == 1));
    CHECK(b.first >= 0);
  }
}

TEST_CASE("inner subdomain") {
  const Grid g = line(9);
  const auto mask = g.inner_subdomain(0.2);
  int count = 0;
  for (bool b : mask) count += b;
  CHECK(count == 7);  // x = 0.2 .. 0.8
  CHECK_THROWS_AS(g.inner_subdomain(0.6), ConfigError);
}

TEST_CASE("Laplacian: 1x1 case, exact symmetry, M-matrix signs") {
  const Grid one = build_grid({1, {1.0}, {1}});
  const DiscreteOperator op1 = assemble_laplacian(one);
  CHECK(op1.matrix.rows() == 1);
  CHECK(op1.matrix.coeff(0, 0) == doctest::Approx(8.0));

  for (const DomainSpec& d : {DomainSpec{1, {1.0}, {17}}, DomainSpec{2, {1.0, 0.5}, {6, 4}}}) {
    const Grid g = build_grid(d);
    const DiscreteOperator op = assemble_laplacian(g);
    const Eigen::MatrixXd a(op.matrix);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      CHECK(a(i, i) > 0.0);
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (i != j) CHECK(a(i, j) <= 0.0);
      }
    }
  }
}

TEST_CASE("Laplacian smallest eigenvalue matches the closed form") {
  const Grid g = line(255);
  const DiscreteOperator op = assemble_laplacian(g);
  const Eigen::MatrixXd a(op.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  CHECK(eig.eigenvalues()[0] == doctest::Approx(oracle::discrete_lambda1(255)).epsilon(1e-10));
}

TEST_CASE("principal eigenpair on the unit interval") {
  const auto start = std::chrono::steady_clock::now();
  const Grid g = line(255);
  const DiscreteOperator op = assemble_laplacian(g);
  const EigenPair e = principal_eigenpair(op, g);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  CHECK(std::abs(e.value / (oracle::pi * oracle::pi) - 1.0) <= 1e-3);
  CHECK(e.value == doctest::Approx(oracle::discrete_lambda1(255)).epsilon(1e-10));
  CHECK(std::abs(quadrature(e.vector, g) - 1.0) <= 1e-12);
  CHECK(e.vector.minCoeff() > 0.0);
  const auto ref = oracle::discrete_phi1(255);
  double err = 0.0;
  for (int i = 0; i < 255; ++i) err = std::max(err, std::abs(e.vector[i] - ref[static_cast<std::size_t>(i)]));
  CHECK(err < 1e-8);
  CHECK(seconds < 1.0);
}

TEST_CASE("principal eigenpair on a rectangle separates") {
  const Grid g = build_grid({2, {1.0, 2.0}, {15, 31}});
  const EigenPair e = principal_eigenpair(assemble_laplacian(g), g);
  const double expected = oracle::discrete_lambda1(15, 1.0) + oracle::discrete_lambda1(31, 2.0);
  CHECK(e.value == doctest::Approx(expected).epsilon(1e-9));
  CHECK(std::abs(quadrature(e.vector, g) - 1.0) <= 1e-12);
  CHECK(e.vector.minCoeff() > 0.0);
}

TEST_CASE("normal derivative of the sine profile") {
  const int n = 255;
  const Grid g = line(n);
  Field u(n);
  for (int i = 0; i < n; ++i) u[i] = std::sin(oracle::pi * g.coordinate(i, 0));
  REQUIRE(g.boundary().size() == 2u);
  for (std::size_t b = 0; b < 2; ++b) {
    // d/dnu sin(pi x) = -pi at both ends; the one-sided stencil is second order.
    CHECK(normal_derivative(u, g, b) == doctest::Approx(-oracle::pi).epsilon(1e-4));
  }
}

TEST_CASE("field CSV has one coordinate column per axis") {
  const Grid g = build_grid({2, {1.0, 1.0}, {2}});
  const Field f = Field::Constant(4, 0.5);
  std::ostringstream out;
  write_field_csv(out, g, {"u"}, {&f});
  const std::string s = out.str();
  CHECK(s.rfind("x,y,u\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 5);
}
