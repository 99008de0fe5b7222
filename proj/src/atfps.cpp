#include "rte/atfps.hpp"

#include <cmath>
#include <sstream>

#include "rte/error.hpp"
#include "rte/parallel.hpp"

namespace rte {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kSingularTol = 1e-14;

// Modes of cell c centered on face f, split by selection.
void centered(const CompressionIndex& index, const CellBasis& B, int c, Face f, std::vector<int>& sel,
              std::vector<int>& unsel) {
  for (int k : index.selected[c])
    if (B.face(k) == f) sel.push_back(k);
  for (int k : index.unselected[c])
    if (B.face(k) == f) unsel.push_back(k);
}

// Rows of the full system contributed by each interface.
std::vector<int> full_row_offsets(const Discretization& disc) {
  const auto& itfs = disc.mesh.interfaces();
  std::vector<int> off(itfs.size() + 1, 0);
  for (std::size_t i = 0; i < itfs.size(); ++i)
    off[i + 1] = off[i] + (itfs[i].boundary ? 2 * disc.M() : 4 * disc.M());
  return off;
}

// Trace of every mode of cell c at an interface midpoint, optionally
// restricted to a subset of directions.
Eigen::MatrixXd traces(const Discretization& disc, int c, const Interface& itf, const std::vector<int>* dirs) {
  const CellBasis& B = disc.bases[c];
  const int nm = disc.modes_per_cell();
  const int nd = dirs ? static_cast<int>(dirs->size()) : disc.quad.size();
  Eigen::MatrixXd T(nd, nm);
  for (int k = 0; k < nm; ++k) {
    const Eigen::VectorXd v = B.eval(k, itf.mid_x, itf.mid_y);
    if (dirs)
      for (int r = 0; r < nd; ++r) T(r, k) = v((*dirs)[r]);
    else
      T.col(k) = v;
  }
  return T;
}

Eigen::VectorXd restrict_to(const Eigen::VectorXd& v, const std::vector<int>* dirs) {
  if (!dirs) return v;
  Eigen::VectorXd out(dirs->size());
  for (std::size_t r = 0; r < dirs->size(); ++r) out(r) = v((*dirs)[r]);
  return out;
}

// Smooth part (selected modes plus particular solution) of cell c at an interface midpoint.
Eigen::VectorXd smooth_trace(const CompressionIndex& index, const Discretization& disc, const Eigen::VectorXd& alpha,
                             int c, const Interface& itf) {
  const CellBasis& B = disc.bases[c];
  const int nm = disc.modes_per_cell();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(disc.quad.size(), B.particular());
  for (int k : index.selected[c]) {
    const double a = alpha(c * nm + k);
    if (a != 0.0) v += a * B.eval(k, itf.mid_x, itf.mid_y);
  }
  return v;
}

}  // namespace

Eigen::VectorXd InterfaceBasis::project(const Eigen::VectorXd& v) const {
  if (v.size() != dim) throw ConfigError("InterfaceBasis::project: vector size mismatch");
  return lu.solve(v);
}

Eigen::VectorXd InterfaceBasis::project_normalized(const Eigen::VectorXd& v) const {
  return project(v).cwiseProduct(scale);
}

Eigen::MatrixXd InterfaceBasis::normalized() const {
  Eigen::MatrixXd out = basis;
  for (int k = 0; k < dim; ++k) out.col(k) /= scale(k);
  return out;
}

Eigen::MatrixXd InterfaceBasis::selected_projector() const {
  return lu.inverse().topRows(n_selected);
}

InterfaceBasis make_interface_basis(const Eigen::MatrixXd& selected, const Eigen::MatrixXd& unselected) {
  const Eigen::Index dim = selected.cols() > 0 ? selected.rows() : unselected.rows();
  if ((selected.cols() > 0 && selected.rows() != dim) || (unselected.cols() > 0 && unselected.rows() != dim) ||
      selected.cols() + unselected.cols() != dim) {
    std::ostringstream os;
    os << "make_interface_basis: " << selected.cols() << " + " << unselected.cols()
       << " columns cannot form a basis of dimension " << dim;
    throw ConfigError(os.str());
  }
  InterfaceBasis ib;
  ib.dim = static_cast<int>(dim);
  ib.n_selected = static_cast<int>(selected.cols());
  ib.basis.resize(dim, dim);
  if (ib.n_selected > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(selected);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
    const auto& R = qr.matrixQR();
    double rmax = 0.0;
    for (int j = 0; j < ib.n_selected; ++j) rmax = std::max(rmax, std::abs(R(j, j)));
    ib.rank = 0;
    for (int j = 0; j < ib.n_selected; ++j)
      if (std::abs(R(j, j)) > kRankTol * rmax) ++ib.rank;
    ib.dependent = ib.n_selected - ib.rank;
    ib.basis.leftCols(ib.n_selected) = Q.leftCols(ib.n_selected);
  }
  if (unselected.cols() > 0) ib.basis.rightCols(unselected.cols()) = unselected;
  ib.scale.resize(dim);
  for (int k = 0; k < ib.dim; ++k) ib.scale(k) = ib.basis.col(k).cwiseAbs().maxCoeff();
  ib.lu.compute(ib.basis);
  const Eigen::VectorXd pivots = ib.lu.matrixLU().diagonal().cwiseAbs();
  if (!(ib.scale.minCoeff() > 0.0) || !(pivots.minCoeff() > kSingularTol * pivots.maxCoeff()) ||
      !(ib.lu.rcond() > kSingularTol))
    throw NumericalError("make_interface_basis: interface vectors are not a basis");
  return ib;
}

CompressionIndex select_modes(const Discretization& disc, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("select_modes: delta must lie in (0, 1)");
  CompressionIndex index;
  index.delta = delta;
  const int cells = disc.cells();
  const int nm = disc.modes_per_cell();
  index.full_dimension = disc.full_dimension();
  index.selected.resize(cells);
  index.unselected.resize(cells);
  index.cell_col_offset.assign(cells + 1, 0);
  const double log_delta = std::log(delta);
  for (int c = 0; c < cells; ++c) {
    const CellBasis& B = disc.bases[c];
    for (int k = 0; k < nm; ++k) {
      const double log_d = -0.5 * std::abs(B.xi(k)) * B.eff_total() * B.h();
      (log_d > log_delta ? index.selected[c] : index.unselected[c]).push_back(k);
    }
    index.cell_col_offset[c + 1] = index.cell_col_offset[c] + static_cast<int>(index.selected[c].size());
  }
  return index;
}

void build_interface_bases(CompressionIndex& index, const Discretization& disc) {
  const Mesh& mesh = disc.mesh;
  const auto& itfs = mesh.interfaces();
  index.interfaces.assign(itfs.size(), InterfaceBasis{});
  parallel_for(itfs.size(), [&](std::size_t id) {
    const Interface& itf = itfs[id];
    std::vector<ModeRef> sel_refs, unsel_refs;
    std::vector<Eigen::VectorXd> sel_cols, unsel_cols;
    std::vector<int> dirs;
    if (itf.boundary) dirs = incoming_directions(disc.quad, itf.face);
    const std::vector<int>* dp = itf.boundary ? &dirs : nullptr;

    auto collect = [&](int c, Face f) {
      std::vector<int> s, u;
      centered(index, disc.bases[c], c, f, s, u);
      for (int k : s) {
        sel_refs.push_back({c, k, true});
        sel_cols.push_back(restrict_to(disc.bases[c].eigenvector(k), dp));
      }
      for (int k : u) {
        unsel_refs.push_back({c, k, false});
        unsel_cols.push_back(restrict_to(disc.bases[c].eigenvector(k), dp));
      }
      return static_cast<int>(s.size());
    };
    const int n_minus = collect(itf.minus, itf.face);
    if (!itf.boundary) collect(itf.plus, opposite(itf.face));

    const int dim = itf.boundary ? 2 * disc.M() : 4 * disc.M();
    Eigen::MatrixXd S(dim, sel_cols.size()), U(dim, unsel_cols.size());
    for (std::size_t j = 0; j < sel_cols.size(); ++j) S.col(j) = sel_cols[j];
    for (std::size_t j = 0; j < unsel_cols.size(); ++j) U.col(j) = unsel_cols[j];
    InterfaceBasis ib;
    try {
      ib = make_interface_basis(S, U);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "interface " << id << ": " << e.what();
      throw NumericalError(os.str());
    }
    ib.n_selected_minus = n_minus;
    ib.modes = std::move(sel_refs);
    ib.modes.insert(ib.modes.end(), unsel_refs.begin(), unsel_refs.end());
    index.interfaces[id] = std::move(ib);
  });
}

CompressionIndex compress(const Discretization& disc, double delta) {
  CompressionIndex index = select_modes(disc, delta);
  build_interface_bases(index, disc);
  return index;
}

LinearSystem assemble_compressed(const CompressionIndex& index, const Discretization& disc, const BoundaryData& bc) {
  if (!index.complete()) throw ConfigError("assemble_compressed: interface bases have not been built");
  const Mesh& mesh = disc.mesh;
  const AngularQuadrature& quad = disc.quad;
  if (bc.slots_per_interface != 2 * quad.M ||
      bc.values.size() != std::size_t(mesh.boundary_count()) * bc.slots_per_interface)
    throw ConfigError("assemble_compressed: boundary data does not cover every (boundary interface, incoming direction)");
  for (std::size_t i = 0; i < bc.values.size(); ++i)
    if (!std::isfinite(bc.values[i])) {
      std::ostringstream os;
      os << "assemble_compressed: missing inflow value for boundary interface " << i / bc.slots_per_interface
         << ", slot " << i % bc.slots_per_interface;
      throw ConfigError(os.str());
    }

  const int n = index.dimension();
  const int nm = disc.modes_per_cell();
  LinearSystem sys;
  sys.M = quad.M;
  sys.I = mesh.I();
  sys.compressed = true;
  sys.delta = index.delta;
  sys.b = Eigen::VectorXd::Zero(n);
  sys.cell_col_offset = index.cell_col_offset;
  sys.col_mode.reserve(n);
  for (int c = 0; c < disc.cells(); ++c)
    for (int k : index.selected[c]) sys.col_mode.push_back(k);

  // Column of (cell, mode) in the compressed layout, -1 if unselected.
  std::vector<int> column(std::size_t(disc.cells()) * nm, -1);
  for (int c = 0; c < disc.cells(); ++c)
    for (std::size_t j = 0; j < index.selected[c].size(); ++j)
      column[std::size_t(c) * nm + index.selected[c][j]] = index.cell_col_offset[c] + static_cast<int>(j);

  std::vector<Eigen::Triplet<double>> trip;
  int row = 0;
  const auto& itfs = mesh.interfaces();
  for (int id = 0; id < static_cast<int>(itfs.size()); ++id) {
    const Interface& itf = itfs[id];
    const InterfaceBasis& ib = index.interfaces[id];
    if (ib.n_selected == 0) continue;
    const Eigen::MatrixXd P = ib.selected_projector();
    std::vector<int> dirs;
    if (itf.boundary) dirs = incoming_directions(quad, itf.face);
    const std::vector<int>* dp = itf.boundary ? &dirs : nullptr;

    auto add_cell = [&](int c, double sign, Eigen::Index r0) {
      const Eigen::MatrixXd T = traces(disc, c, itf, dp);
      for (int k : index.selected[c]) {
        const Eigen::VectorXd col = P * T.col(k);
        for (int r = 0; r < ib.n_selected; ++r)
          if (col(r) != 0.0) trip.emplace_back(int(r0) + r, column[std::size_t(c) * nm + k], sign * col(r));
      }
    };

    Eigen::VectorXd rhs;
    if (!itf.boundary) {
      add_cell(itf.minus, 1.0, row);
      add_cell(itf.plus, -1.0, row);
      const double jump = disc.bases[itf.plus].particular() - disc.bases[itf.minus].particular();
      rhs = P * Eigen::VectorXd::Constant(ib.dim, jump);
    } else {
      add_cell(itf.minus, 1.0, row);
      const int bidx = mesh.boundary_index(id);
      Eigen::VectorXd mis(ib.dim);
      for (int s = 0; s < ib.dim; ++s) mis(s) = bc.at(bidx, s) - disc.bases[itf.minus].particular();
      rhs = P * mis;
    }
    for (int r = 0; r < ib.n_selected; ++r, ++row) {
      sys.b(row) = rhs(r);
      sys.row_interface.push_back(id);
      sys.row_local.push_back(r);
      sys.row_owner.push_back(itf.boundary || r < ib.n_selected_minus ? itf.minus : itf.plus);
    }
  }
  if (row != n) {
    std::ostringstream os;
    os << "assemble_compressed: row count " << row << " differs from column count " << n;
    throw NumericalError(os.str());
  }
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();
  return sys;
}

SparseMatrix projection_matrix(const CompressionIndex& index, const Discretization& disc) {
  if (!index.complete()) throw ConfigError("projection_matrix: interface bases have not been built");
  const auto off = full_row_offsets(disc);
  std::vector<Eigen::Triplet<double>> trip;
  int row = 0;
  for (std::size_t id = 0; id < index.interfaces.size(); ++id) {
    const InterfaceBasis& ib = index.interfaces[id];
    if (ib.n_selected == 0) continue;
    const Eigen::MatrixXd P = ib.selected_projector();
    for (int r = 0; r < ib.n_selected; ++r)
      for (int s = 0; s < ib.dim; ++s)
        if (P(r, s) != 0.0) trip.emplace_back(row + r, off[id] + s, P(r, s));
    row += ib.n_selected;
  }
  SparseMatrix Pi(row, off.back());
  Pi.setFromTriplets(trip.begin(), trip.end());
  Pi.makeCompressed();
  return Pi;
}

Eigen::VectorXd project_rows(const CompressionIndex& index, const Discretization& disc,
                             const Eigen::VectorXd& full_rows) {
  if (full_rows.size() != disc.full_dimension()) throw ConfigError("project_rows: vector does not match the full row layout");
  return projection_matrix(index, disc) * full_rows;
}

Eigen::VectorXd expand_selected(const CompressionIndex& index, const Discretization& disc,
                                const Eigen::VectorXd& alpha_delta) {
  if (alpha_delta.size() != index.dimension()) throw ConfigError("expand_selected: compressed vector has the wrong size");
  const int nm = disc.modes_per_cell();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(disc.full_dimension());
  for (int c = 0; c < disc.cells(); ++c)
    for (std::size_t j = 0; j < index.selected[c].size(); ++j)
      alpha(c * nm + index.selected[c][j]) = alpha_delta(index.cell_col_offset[c] + static_cast<int>(j));
  return alpha;
}

LayerReconstruction reconstruct_layers(const CompressionIndex& index, const Discretization& disc, const BoundaryData& bc,
                                       const Eigen::VectorXd& alpha_delta) {
  if (!index.complete()) throw ConfigError("reconstruct_layers: interface bases have not been built");
  LayerReconstruction out;
  out.alpha = expand_selected(index, disc, alpha_delta);
  const Eigen::VectorXd smooth = out.alpha;
  const Mesh& mesh = disc.mesh;
  const int nm = disc.modes_per_cell();
  const auto& itfs = mesh.interfaces();
  for (int id = 0; id < static_cast<int>(itfs.size()); ++id) {
    const Interface& itf = itfs[id];
    const InterfaceBasis& ib = index.interfaces[id];
    if (ib.n_selected == ib.dim) continue;
    Eigen::VectorXd coef;
    if (!itf.boundary) {
      const Eigen::VectorXd jump =
          smooth_trace(index, disc, smooth, itf.plus, itf) - smooth_trace(index, disc, smooth, itf.minus, itf);
      coef = ib.project(jump);
    } else {
      const auto dirs = incoming_directions(disc.quad, itf.face);
      const Eigen::VectorXd tr = restrict_to(smooth_trace(index, disc, smooth, itf.minus, itf), &dirs);
      const int bidx = mesh.boundary_index(id);
      Eigen::VectorXd mis(ib.dim);
      for (int s = 0; s < ib.dim; ++s) mis(s) = bc.at(bidx, s) - tr(s);
      coef = ib.project(mis);
    }
    for (int u = ib.n_selected; u < ib.dim; ++u) {
      const ModeRef& m = ib.modes[u];
      const double sign = (itf.boundary || m.cell == itf.minus) ? 1.0 : -1.0;
      out.alpha(m.cell * nm + m.mode) = sign * coef(u);
    }
  }
  out.centers = center_flux(disc, out.alpha);
  return out;
}

RemainderReport dropped_remainder(const CompressionIndex& index, const Discretization& disc,
                                  const Eigen::VectorXd& alpha) {
  if (alpha.size() != disc.full_dimension()) throw ConfigError("dropped_remainder: coefficient vector has the wrong size");
  RemainderReport rep;
  const int nm = disc.modes_per_cell();
  const double amax = alpha.size() ? alpha.cwiseAbs().maxCoeff() : 0.0;
  const auto& itfs = disc.mesh.interfaces();
  for (int id = 0; id < static_cast<int>(itfs.size()); ++id) {
    const Interface& itf = itfs[id];
    if (itf.boundary) continue;
    Eigen::VectorXd tau = Eigen::VectorXd::Zero(disc.quad.size());
    int terms = 0;
    auto add = [&](int c, Face centered_face, double sign) {
      const CellBasis& B = disc.bases[c];
      for (int k : index.unselected[c]) {
        if (B.face(k) == centered_face) continue;
        const double a = alpha(c * nm + k);
        ++terms;
        if (a != 0.0) tau += sign * a * B.eval(k, itf.mid_x, itf.mid_y);
      }
    };
    add(itf.plus, opposite(itf.face), 1.0);
    add(itf.minus, itf.face, -1.0);
    const double t = tau.cwiseAbs().maxCoeff();
    const double bound = terms * index.delta * amax;
    const double ratio = t == 0.0 ? 0.0 : (bound > 0.0 ? t / bound : INFINITY);
    if (t > rep.max_tau) rep.max_tau = t;
    if (rep.worst_interface < 0 || ratio > rep.max_bound_ratio) {
      rep.max_bound_ratio = ratio;
      rep.worst_interface = id;
    }
  }
  return rep;
}

double posteriori_ratio(const Eigen::VectorXd& psi_full, const Eigen::VectorXd& psi_delta,
                        const Eigen::VectorXd& alpha_delta, double delta) {
  if (psi_full.size() != psi_delta.size()) throw ConfigError("posteriori_ratio: sample vectors differ in size");
  if (!(delta > 0.0)) throw ConfigError("posteriori_ratio: delta must be positive");
  const double num = psi_full.size() ? (psi_full - psi_delta).cwiseAbs().maxCoeff() : 0.0;
  const double amax = alpha_delta.size() ? alpha_delta.cwiseAbs().maxCoeff() : 0.0;
  if (amax == 0.0) {
    if (num == 0.0) return 0.0;
    throw NumericalError("posteriori_ratio: zero coefficient vector with nonzero error");
  }
  return num / (delta * amax);
}

}  // namespace rte
