#include "rte/assembly.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

#include "rte/error.hpp"

namespace rte {

namespace {

double dot_normal(const Direction& d, Face f) {
  const auto n = face_normal(f);
  return d.c * n[0] + d.s * n[1];
}

}  // namespace

std::vector<int> incoming_directions(const AngularQuadrature& quad, Face face) {
  std::vector<int> out;
  for (int m = 0; m < quad.size(); ++m)
    if (dot_normal(quad.directions[m], face) < 0.0) out.push_back(m);
  return out;
}

BoundaryData BoundaryData::constant(const Mesh& mesh, const AngularQuadrature& quad, double value) {
  BoundaryData bc;
  bc.slots_per_interface = 2 * quad.M;
  bc.values.assign(std::size_t(mesh.boundary_count()) * bc.slots_per_interface, value);
  return bc;
}

LinearSystem assemble_full(const Discretization& disc, const BoundaryData& bc) {
  const Mesh& mesh = disc.mesh;
  const AngularQuadrature& quad = disc.quad;
  const int nd = quad.size();
  const int nm = disc.modes_per_cell();
  const int n = disc.full_dimension();

  if (bc.slots_per_interface != 2 * quad.M ||
      bc.values.size() != std::size_t(mesh.boundary_count()) * bc.slots_per_interface)
    throw ConfigError("assemble_full: boundary data does not cover every (boundary interface, incoming direction)");
  for (std::size_t i = 0; i < bc.values.size(); ++i) {
    if (!std::isfinite(bc.values[i])) {
      std::ostringstream os;
      os << "assemble_full: missing inflow value for boundary interface " << i / bc.slots_per_interface
         << ", slot " << i % bc.slots_per_interface;
      throw ConfigError(os.str());
    }
  }

  LinearSystem sys;
  sys.M = quad.M;
  sys.I = mesh.I();
  sys.b = Eigen::VectorXd::Zero(n);
  sys.cell_col_offset.resize(disc.cells() + 1);
  for (int c = 0; c <= disc.cells(); ++c) sys.cell_col_offset[c] = c * nm;
  sys.col_mode.resize(n);
  for (int j = 0; j < n; ++j) sys.col_mode[j] = j % nm;
  sys.row_interface.reserve(n);
  sys.row_local.reserve(n);
  sys.row_owner.reserve(n);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(n) * 2 * nm);
  int row = 0;

  // Traces of all modes of cell c at a point, as an nd x nm matrix.
  auto traces = [&](int c, double x, double y) {
    const CellBasis& B = disc.bases[c];
    Eigen::MatrixXd T(nd, nm);
    for (int k = 0; k < nm; ++k) T.col(k) = B.eval(k, x, y);
    return T;
  };

  const auto& itfs = mesh.interfaces();
  for (int id = 0; id < static_cast<int>(itfs.size()); ++id) {
    const Interface& itf = itfs[id];
    if (!itf.boundary) {
      const Eigen::MatrixXd Tm = traces(itf.minus, itf.mid_x, itf.mid_y);
      const Eigen::MatrixXd Tp = traces(itf.plus, itf.mid_x, itf.mid_y);
      const double jump = disc.bases[itf.plus].particular() - disc.bases[itf.minus].particular();
      for (int m = 0; m < nd; ++m, ++row) {
        for (int k = 0; k < nm; ++k) {
          if (Tm(m, k) != 0.0) trip.emplace_back(row, itf.minus * nm + k, Tm(m, k));
          if (Tp(m, k) != 0.0) trip.emplace_back(row, itf.plus * nm + k, -Tp(m, k));
        }
        sys.b(row) = jump;
        const double un = itf.vertical ? quad.directions[m].c : quad.directions[m].s;
        sys.row_interface.push_back(id);
        sys.row_local.push_back(m);
        sys.row_owner.push_back(un > 0.0 ? itf.plus : itf.minus);
      }
    } else {
      const int c = itf.minus;
      const Eigen::MatrixXd T = traces(c, itf.mid_x, itf.mid_y);
      const auto in = incoming_directions(quad, itf.face);
      const int bidx = mesh.boundary_index(id);
      for (std::size_t slot = 0; slot < in.size(); ++slot, ++row) {
        const int m = in[slot];
        for (int k = 0; k < nm; ++k)
          if (T(m, k) != 0.0) trip.emplace_back(row, c * nm + k, T(m, k));
        sys.b(row) = bc.at(bidx, static_cast<int>(slot)) - disc.bases[c].particular();
        sys.row_interface.push_back(id);
        sys.row_local.push_back(static_cast<int>(slot));
        sys.row_owner.push_back(c);
      }
    }
  }
  if (row != n) {
    std::ostringstream os;
    os << "assemble_full: row count " << row << " differs from column count " << n;
    throw NumericalError(os.str());
  }
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();
  return sys;
}

Eigen::VectorXd eval_cell(const Discretization& disc, const Eigen::VectorXd& alpha, int cell, double x, double y) {
  const int nm = disc.modes_per_cell();
  if (alpha.size() != disc.full_dimension()) throw ConfigError("eval_cell: coefficient vector has the wrong size");
  if (cell < 0 || cell >= disc.cells()) throw ConfigError("eval_cell: cell index out of range");
  const CellBasis& B = disc.bases[cell];
  B.check_inside(x, y);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(disc.quad.size(), B.particular());
  for (int k = 0; k < nm; ++k) {
    const double a = alpha(cell * nm + k);
    if (a != 0.0) v += a * B.eval(k, x, y);
  }
  return v;
}

std::vector<Eigen::VectorXd> eval_solution(const Discretization& disc, const Eigen::VectorXd& alpha,
                                           std::span<const CellPoint> points) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(eval_cell(disc, alpha, p.cell, p.x, p.y));
  return out;
}

Eigen::VectorXd sample_solution(const Discretization& disc, const Eigen::VectorXd& alpha) {
  const int nd = disc.quad.size();
  const Mesh& mesh = disc.mesh;
  Eigen::VectorXd out(std::size_t(disc.cells()) * 5 * nd);
  for (int c = 0; c < disc.cells(); ++c) {
    std::array<std::array<double, 2>, 5> pts{{{mesh.x_center(c), mesh.y_center(c)},
                                              mesh.face_midpoint(c, Face::Left),
                                              mesh.face_midpoint(c, Face::Right),
                                              mesh.face_midpoint(c, Face::Bottom),
                                              mesh.face_midpoint(c, Face::Top)}};
    for (int p = 0; p < 5; ++p)
      out.segment((std::size_t(c) * 5 + p) * nd, nd) = eval_cell(disc, alpha, c, pts[p][0], pts[p][1]);
  }
  return out;
}

FluxGrid center_flux(const Discretization& disc, const Eigen::VectorXd& alpha) {
  FluxGrid g(disc.quad.size(), disc.mesh.I());
  for (int c = 0; c < disc.cells(); ++c) {
    const Eigen::VectorXd v = eval_cell(disc, alpha, c, disc.mesh.x_center(c), disc.mesh.y_center(c));
    for (int m = 0; m < g.channels; ++m) g.at(m, c) = v(m);
  }
  return g;
}

double max_continuity_jump(const Discretization& disc, const Eigen::VectorXd& alpha) {
  double worst = 0.0;
  for (const auto& itf : disc.mesh.interfaces()) {
    if (itf.boundary) continue;
    const Eigen::VectorXd a = eval_cell(disc, alpha, itf.minus, itf.mid_x, itf.mid_y);
    const Eigen::VectorXd b = eval_cell(disc, alpha, itf.plus, itf.mid_x, itf.mid_y);
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return worst;
}

Eigen::VectorXd solve_sparse_direct(const LinearSystem& sys) {
  Eigen::SparseMatrix<double, Eigen::ColMajor> A = sys.A;
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw NumericalError("sparse LU failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(sys.b);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("sparse LU solve failed");
  return x;
}

Eigen::VectorXd solve_dense_direct(const LinearSystem& sys) {
  const Eigen::MatrixXd A = Eigen::MatrixXd(sys.A);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd x = lu.solve(sys.b);
  if (!x.allFinite()) throw NumericalError("dense LU produced non-finite values");
  return x;
}

}  // namespace rte
