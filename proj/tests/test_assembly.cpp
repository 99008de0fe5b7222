#include <cmath>

#include "doctest.h"
#include "rte/assembly.hpp"
#include "rte/medium.hpp"

using namespace rte;

namespace {

Discretization diffusion_disc(int I, int M = 1, std::uint64_t seed = 4) {
  return discretize(sample_medium(Regime::Diffusion, 2, seed), I, make_quadrature(M, 0.0), nullptr, 1);
}

}  // namespace

TEST_CASE("system is square with 8 M I^2 rows") {
  for (int M : {1, 2})
    for (int I : {1, 2, 4, 8}) {
      const Discretization d = diffusion_disc(I, M);
      const LinearSystem s = assemble_full(d, BoundaryData::constant(d.mesh, d.quad, 0.0));
      CHECK(s.A.rows() == 8 * M * I * I);
      CHECK(s.A.cols() == s.A.rows());
      CHECK(s.size() == s.A.rows());
      CHECK(2 * I * (I - 1) * 4 * M + 4 * I * 2 * M == s.A.rows());
      CHECK(s.cells() == I * I);
      Eigen::VectorXi per_row = Eigen::VectorXi::Zero(s.A.rows());
      for (int k = 0; k < s.A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(s.A, k); it; ++it) per_row(it.row())++;
      CHECK(per_row.maxCoeff() <= 16 * M);
      std::vector<int> owned(s.cells(), 0);
      for (int o : s.row_owner) owned[o]++;
      for (int c = 0; c < s.cells(); ++c) CHECK(owned[c] == s.cell_columns(c));
    }
}

TEST_CASE("assembly is deterministic and thread independent") {
  const MediumField f = sample_medium(Regime::Transport, 3, 8);
  const Discretization d1 = discretize(f, 8, make_quadrature(2, 0.3), nullptr, 1);
  const Discretization d4 = discretize(f, 8, make_quadrature(2, 0.3), nullptr, 4);
  const BoundaryData bc = BoundaryData::constant(d1.mesh, d1.quad, 1.0);
  const LinearSystem a = assemble_full(d1, bc), b = assemble_full(d4, bc);
  REQUIRE(a.A.nonZeros() == b.A.nonZeros());
  CHECK(Eigen::MatrixXd(a.A - b.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.b - b.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant manufactured solution is alpha = 0") {
  const MediumField f = constant_medium(2.0, 0.5, 0.1, 3.0);
  const Discretization d = discretize(f, 4, make_quadrature(1, 0.0), nullptr, 1);
  const double chi = 3.0 / 0.5;
  const LinearSystem s = assemble_full(d, BoundaryData::constant(d.mesh, d.quad, chi));
  CHECK(s.b.cwiseAbs().maxCoeff() <= 1e-12);
  const Eigen::VectorXd alpha = solve_sparse_direct(s);
  CHECK(alpha.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("I=1 M=1 gives an 8x8 system") {
  const Discretization d = diffusion_disc(1);
  CHECK(assemble_full(d, BoundaryData::constant(d.mesh, d.quad, 1.0)).A.rows() == 8);
}

TEST_CASE("direct solves satisfy the residual oracle and continuity") {
  for (int I : {2, 4, 8}) {
    const Discretization d = diffusion_disc(I);
    const LinearSystem s = assemble_full(d, BoundaryData::constant(d.mesh, d.quad, 1.0));
    const Eigen::VectorXd a = solve_sparse_direct(s);
    CHECK((s.A * a - s.b).norm() <= 1e-10 * s.b.norm());
    CHECK(max_continuity_jump(d, a) <= 1e-8 * a.cwiseAbs().maxCoeff());
    if (I <= 4) CHECK((solve_dense_direct(s) - a).cwiseAbs().maxCoeff() <= 1e-8 * a.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("evaluation of zero and unit coefficient vectors") {
  const Discretization d = diffusion_disc(2);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(d.full_dimension());
  const int cell = 3;
  const double chi = d.bases[cell].particular();
  const Eigen::VectorXd v = eval_cell(d, alpha, cell, d.mesh.x_center(cell), d.mesh.y_center(cell));
  CHECK((v.array() - chi).abs().maxCoeff() == 0.0);
  const int k = 2;
  alpha(cell * d.modes_per_cell() + k) = 1.0;
  const Eigen::Vector2d z = d.bases[cell].reference_point(k);
  const Eigen::VectorXd w = eval_cell(d, alpha, cell, z.x(), z.y());
  CHECK((w - (d.bases[cell].eigenvector(k).array() + chi).matrix()).cwiseAbs().maxCoeff() <= 1e-15);
  const FluxGrid g = center_flux(d, Eigen::VectorXd::Zero(d.full_dimension()));
  CHECK(g.channels == 4);
  CHECK(g.at(1, cell) == chi);
}

TEST_CASE("D map: particular flux maps to zero and fits round-trip") {
  {
    // Homogeneous medium: neighbour-averaged midpoints also carry chi^s.
    const Discretization h = discretize(constant_medium(2.0, 0.5, 0.05, 1.5), 4, make_quadrature(1, 0.0), nullptr, 1);
    FluxGrid psi(4, 4);
    for (int m = 0; m < 4; ++m)
      for (int c = 0; c < 16; ++c) psi.at(m, c) = h.bases[c].particular();
    CHECK(CoefficientFit(h).apply(psi).cwiseAbs().maxCoeff() <= 1e-10);
  }
  const Discretization d = diffusion_disc(4);
  const CoefficientFit D(d);
  CHECK(D.output_size() == d.full_dimension());
  // D(0) is the particular-only fit: the affine offset.
  CHECK((D.apply(FluxGrid(4, 4)) - D.offset()).cwiseAbs().maxCoeff() == 0.0);
  // Round trip on a solved problem: the fit reproduces the sampled flux to its own residual.
  const LinearSystem s = assemble_full(d, BoundaryData::constant(d.mesh, d.quad, 1.0));
  const Eigen::VectorXd alpha = solve_sparse_direct(s);
  const FluxGrid centers = center_flux(d, alpha);
  const Eigen::VectorXd fit = D.apply(centers);
  const double r_fit = D.residual(centers, fit);
  CHECK(r_fit <= D.residual(centers, alpha) + 1e-12);
  const FluxGrid again = center_flux(d, fit);
  double diff = 0.0;
  for (std::size_t i = 0; i < again.data.size(); ++i) diff = std::max(diff, std::abs(again.data[i] - centers.data[i]));
  CHECK(diff <= r_fit + 1e-12);
}

TEST_CASE("D map design has 20 equations and 8 unknowns per cell for M=1") {
  const Discretization d = diffusion_disc(2);
  const CoefficientFit D(d);
  CHECK(CoefficientFit::kPoints * d.quad.size() == 20);
  CHECK(D.matrix().rows() == 8 * 4);
  CHECK(D.matrix().cols() == 4 * 4);
}
