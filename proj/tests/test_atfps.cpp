#include <cmath>

#include "doctest.h"
#include "rte/assembly.hpp"
#include "rte/atfps.hpp"
#include "rte/error.hpp"
#include "rte/medium.hpp"
#include "rte/rng.hpp"

using namespace rte;

namespace {

Discretization disc_for(Regime r, int I, std::uint64_t seed, int threads = 1) {
  return discretize(sample_medium(r, 2, seed), I, make_quadrature(1, 0.0), nullptr, threads);
}

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("tiny delta keeps every mode when no decay underflows") {
  const Discretization d = disc_for(Regime::Transport, 4, 2);
  const CompressionIndex idx = select_modes(d, 1e-300);
  for (const auto& s : idx.selected) CHECK(int(s.size()) == d.modes_per_cell());
  CHECK(idx.dimension() == d.full_dimension());
}

TEST_CASE("selection matches the inverted inequality") {
  const Discretization d = disc_for(Regime::Diffusion, 8, 5);
  for (double delta : {0.999999, 0.5, 1e-4}) {
    const CompressionIndex idx = select_modes(d, delta);
    for (int c = 0; c < d.cells(); ++c) {
      const CellBasis& b = d.bases[c];
      std::vector<int> expect;
      for (int k = 0; k < b.mode_count(); ++k)
        if (std::abs(b.xi(k)) * b.eff_total() * b.h() < -2.0 * std::log(delta)) expect.push_back(k);
      CHECK(idx.selected[c] == expect);
      CHECK(idx.selected[c].size() + idx.unselected[c].size() == std::size_t(b.mode_count()));
    }
  }
  CHECK_THROWS_AS(select_modes(d, 1.0), ConfigError);
  CHECK_THROWS_AS(select_modes(d, 0.0), ConfigError);
}

TEST_CASE("diffusive cell selection count against an independent eigen solve") {
  const double sigma_t = 4.0, sigma_a = 1.0, eps = 0.01, h = 1.0 / 32;
  const CellCoefficients cc = make_cell_coefficients(sigma_t, sigma_a, eps, 1.0);
  CHECK(cc.eff_total == doctest::Approx(400.0));
  const AngularQuadrature q = make_quadrature(1, 0.0);
  Discretization d = discretize(Mesh(1), q, {cc}, nullptr, 1);
  // Oracle: eigenvalues of C^{-1} (gamma K W - I) by a general eigen solver, for both axes.
  const int n = q.size();
  Eigen::MatrixXd G = cc.gamma * q.kernel * q.weights.asDiagonal() - Eigen::MatrixXd::Identity(n, n);
  int expect = 0;
  for (int axis = 0; axis < 2; ++axis) {
    Eigen::MatrixXd Ci = Eigen::MatrixXd::Zero(n, n);
    for (int m = 0; m < n; ++m) Ci(m, m) = 1.0 / (axis == 0 ? q.directions[m].c : q.directions[m].s);
    Eigen::EigenSolver<Eigen::MatrixXd> es(Ci * G);
    for (int i = 0; i < n; ++i)
      if (std::exp(-0.5 * std::abs(es.eigenvalues()(i).real()) * cc.eff_total * h) > 1e-4) ++expect;
  }
  // Mesh(1) has h = 1; rebuild the basis with the target width.
  BasisCache cache(q);
  d.bases[0] = build_cell_basis(cc, cache, h, 0.0, 0.0);
  const CompressionIndex idx = select_modes(d, 1e-4);
  CHECK(int(idx.selected[0].size()) == expect);
  CHECK(expect > 0);
  CHECK(expect < 8);
}

TEST_CASE("identical selected columns collapse to rank one") {
  Eigen::MatrixXd sel(4, 2);
  sel.col(0) << 1.0, 0.5, -0.25, 0.125;
  sel.col(1) = sel.col(0);
  Eigen::MatrixXd uns(4, 2);
  uns << 0.3, 1.0, -1.0, 0.2, 0.1, 0.4, 0.7, -0.6;
  const InterfaceBasis ib = make_interface_basis(sel, uns);
  CHECK(ib.rank == 1);
  CHECK(ib.dependent == 1);
  CHECK(ib.n_selected == 2);
  // The first column spans the shared direction.
  CHECK(std::abs(ib.basis.col(0).dot(sel.col(0).normalized())) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("selected QR vectors are orthonormal and projections are Kronecker") {
  Rng rng(3);
  Eigen::MatrixXd sel(6, 3), uns(6, 3);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) sel(i, j) = rng.normal(), uns(i, j) = rng.normal();
  const InterfaceBasis ib = make_interface_basis(sel, uns);
  const Eigen::MatrixXd Q = ib.basis.leftCols(3);
  CHECK((Q.transpose() * Q - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  const Eigen::VectorXd v = 3.0 * ib.basis.col(0) + 2.0 * ib.basis.col(1);
  const Eigen::VectorXd beta = ib.project(v);
  CHECK(beta(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(beta(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(beta(2)) <= 1e-12);
  const Eigen::MatrixXd P = ib.selected_projector();
  CHECK((P * ib.basis.leftCols(3) - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  // Normalized columns: the recorded scale restores the raw ones.
  const Eigen::MatrixXd N = ib.normalized();
  for (int k = 0; k < 6; ++k) {
    CHECK(N.col(k).cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((N.col(k) * ib.scale(k) - ib.basis.col(k)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  CHECK((ib.project_normalized(v) - ib.project(v).cwiseProduct(ib.scale)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("interface set that is not a basis is rejected") {
  Eigen::MatrixXd sel(3, 1), uns(3, 2);
  sel << 1, 0, 0;
  uns << 1, 0, 2, 0, 0, 0;
  CHECK_THROWS_AS(make_interface_basis(sel, uns), NumericalError);
}

TEST_CASE("tiny delta compressed system reproduces the full solution") {
  const Discretization d = disc_for(Regime::Transport, 4, 9);
  const BoundaryData bc = BoundaryData::constant(d.mesh, d.quad, 1.0);
  const Eigen::VectorXd full = solve_dense_direct(assemble_full(d, bc));
  const CompressionIndex idx = compress(d, 1e-300);
  const Eigen::VectorXd ad = solve_dense_direct(assemble_compressed(idx, d, bc));
  const LayerReconstruction rec = reconstruct_layers(idx, d, bc, ad);
  CHECK((rec.alpha - expand_selected(idx, d, ad)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((rec.alpha - full).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("compressed system is the projected full system on selected columns") {
  const Discretization d = disc_for(Regime::Diffusion, 8, 12);
  const BoundaryData bc = BoundaryData::constant(d.mesh, d.quad, 1.0);
  const LinearSystem full = assemble_full(d, bc);
  const CompressionIndex idx = compress(d, 1e-4);
  const LinearSystem comp = assemble_compressed(idx, d, bc);
  const SparseMatrix Pi = projection_matrix(idx, d);
  CHECK(Pi.rows() == comp.size());
  CHECK(Pi.cols() == full.size());
  CHECK((Pi * full.b - comp.b).cwiseAbs().maxCoeff() <= 1e-12 * (1 + full.b.cwiseAbs().maxCoeff()));
  CHECK((project_rows(idx, d, full.b) - comp.b).cwiseAbs().maxCoeff() <= 1e-12 * (1 + full.b.cwiseAbs().maxCoeff()));
  // Columns: expand_selected scatters unit vectors into the full layout.
  for (int j = 0; j < comp.size(); j += 7) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(comp.size());
    e(j) = 1.0;
    const Eigen::VectorXd lhs = comp.A * e;
    const Eigen::VectorXd rhs = Pi * (full.A * expand_selected(idx, d, e));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("diffusion compression at I=16 reduces the dimension") {
  const Discretization d = disc_for(Regime::Diffusion, 16, 1);
  const CompressionIndex idx = compress(d, 1e-4);
  CHECK(idx.dimension() < 8 * 16 * 16);
  CHECK(idx.reduction_ratio() < 1.0);
  CHECK(idx.reduction_ratio() > 0.0);
}

TEST_CASE("dropped remainder respects the delta bound") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const Discretization d = disc_for(Regime::Diffusion, 8, seed);
    const BoundaryData bc = BoundaryData::constant(d.mesh, d.quad, 1.0);
    for (double delta : {1e-2, 1e-4}) {
      const CompressionIndex idx = compress(d, delta);
      const Eigen::VectorXd ad = solve_sparse_direct(assemble_compressed(idx, d, bc));
      const LayerReconstruction rec = reconstruct_layers(idx, d, bc, ad);
      const RemainderReport rr = dropped_remainder(idx, d, rec.alpha);
      CHECK(rr.max_bound_ratio <= 1.0);
    }
  }
}

TEST_CASE("continuous smooth trace gives zero layer coefficients") {
  const MediumField f = constant_medium(4.0, 1.0, 0.01, 2.0);
  const Discretization d = discretize(f, 8, make_quadrature(1, 0.0), nullptr, 1);
  const BoundaryData bc = BoundaryData::constant(d.mesh, d.quad, 2.0);
  const CompressionIndex idx = compress(d, 1e-4);
  REQUIRE(idx.dimension() < d.full_dimension());
  const LinearSystem comp = assemble_compressed(idx, d, bc);
  const Eigen::VectorXd ad = solve_sparse_direct(comp);
  const LayerReconstruction rec = reconstruct_layers(idx, d, bc, ad);
  CHECK(rec.alpha.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("boundary-layer benchmark stays within the a posteriori scale") {
  const Discretization d = disc_for(Regime::Diffusion, 8, 4);
  const BoundaryData bc = BoundaryData::constant(d.mesh, d.quad, 1.0);
  const Eigen::VectorXd full = solve_sparse_direct(assemble_full(d, bc));
  const CompressionIndex idx = compress(d, 1e-4);
  const Eigen::VectorXd ad = solve_sparse_direct(assemble_compressed(idx, d, bc));
  const LayerReconstruction rec = reconstruct_layers(idx, d, bc, ad);
  const Eigen::VectorXd sf = sample_solution(d, full), sd = sample_solution(d, rec.alpha);
  const double ratio = posteriori_ratio(sf, sd, ad, 1e-4);
  CHECK(std::isfinite(ratio));
  CHECK(ratio <= 10.0);
}

TEST_CASE("posteriori ratio edge cases") {
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(5, 2.0);
  CHECK(posteriori_ratio(p, p, Eigen::VectorXd::Constant(3, 1.0), 1e-4) == 0.0);
  CHECK(posteriori_ratio(p, p, Eigen::VectorXd::Zero(3), 1e-4) == 0.0);
  CHECK_THROWS_AS(posteriori_ratio(p, p * 2, Eigen::VectorXd::Zero(3), 1e-4), NumericalError);
  // Transport cells with nothing dropped are identical systems.
  const Discretization d = disc_for(Regime::Transport, 4, 6);
  const BoundaryData bc = BoundaryData::constant(d.mesh, d.quad, 1.0);
  const CompressionIndex idx = compress(d, 1e-6);
  REQUIRE(idx.dimension() == d.full_dimension());
  const Eigen::VectorXd ad = solve_dense_direct(assemble_compressed(idx, d, bc));
  const LayerReconstruction rec = reconstruct_layers(idx, d, bc, ad);
  const Eigen::VectorXd full = solve_dense_direct(assemble_full(d, bc));
  CHECK(posteriori_ratio(sample_solution(d, full), sample_solution(d, rec.alpha), ad, 1e-6) <= 1e-4);
}

TEST_CASE("compression is independent of the thread count") {
  const Discretization d1 = disc_for(Regime::Diffusion, 8, 21, 1);
  const Discretization d3 = disc_for(Regime::Diffusion, 8, 21, 3);
  const BoundaryData bc = BoundaryData::constant(d1.mesh, d1.quad, 1.0);
  const LinearSystem a = assemble_compressed(compress(d1, 1e-4), d1, bc);
  const LinearSystem b = assemble_compressed(compress(d3, 1e-4), d3, bc);
  CHECK(a.A.nonZeros() == b.A.nonZeros());
  CHECK(Eigen::MatrixXd(a.A - b.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.row_owner == b.row_owner);
}

TEST_CASE("filtered loss equals the full loss at tiny delta") {
  const Discretization d = disc_for(Regime::Transport, 4, 15);
  const BoundaryData bc = BoundaryData::constant(d.mesh, d.quad, 0.0);
  const LinearSystem full = assemble_full(d, bc);
  const CompressionIndex idx = compress(d, 1e-300);
  REQUIRE(idx.dimension() == d.full_dimension());
  const LinearSystem comp = assemble_compressed(idx, d, bc);
  const CoefficientFit D(d), Dd(d, &idx.selected);
  for (std::uint64_t s : {1ull, 2ull, 3ull}) {
    const Eigen::VectorXd b = random_vector(full.size(), s);
    FluxGrid psi(4, 4);
    const Eigen::VectorXd pv = random_vector(psi.data.size(), 100 + s);
    for (std::size_t i = 0; i < psi.data.size(); ++i) psi.data[i] = pv(i);
    const double loss = (b - full.A * D.apply(psi)).norm();
    const double loss_d = (project_rows(idx, d, b) - comp.A * Dd.apply(psi)).norm();
    CHECK(loss_d / loss == doctest::Approx(1.0).epsilon(1e-8));
  }
}
