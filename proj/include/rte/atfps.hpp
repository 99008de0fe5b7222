#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rte/assembly.hpp"

namespace rte {

struct ModeRef {
  int cell = -1;
  int mode = -1;
  bool selected = false;
};

// Interface basis: column k is either an orthonormal QR vector spanning the
// selected centered eigenvectors (k < n_selected, C- contributions first) or
// the raw trace of an unselected centered eigenvector. At a boundary the
// vectors are restricted to incoming directions.
struct InterfaceBasis {
  int dim = 0;
  int n_selected = 0;
  int n_selected_minus = 0;  // projected rows owned by C-
  int rank = 0;              // numerical rank of the selected column set
  int dependent = 0;         // selected columns found dependent (kept as completion directions)
  std::vector<ModeRef> modes;
  Eigen::MatrixXd basis;  // raw columns
  Eigen::VectorXd scale;  // max-norm of each raw column
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  // Coefficients of v in the raw columns: v = sum_k beta_k basis.col(k).
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  // Coefficients with respect to the max-norm normalized columns.
  Eigen::VectorXd project_normalized(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd normalized() const;
  // First n_selected rows of basis^{-1}.
  Eigen::MatrixXd selected_projector() const;
};

// QR of the selected columns (relative rank tolerance 1e-10) followed by the
// unselected columns; throws when the combined set is not a basis.
InterfaceBasis make_interface_basis(const Eigen::MatrixXd& selected, const Eigen::MatrixXd& unselected);

struct CompressionIndex {
  double delta = 0.0;
  std::vector<std::vector<int>> selected;    // per cell, ascending mode ids
  std::vector<std::vector<int>> unselected;  // per cell, ascending mode ids
  std::vector<InterfaceBasis> interfaces;    // per interface id, filled by build_interface_bases
  std::vector<int> cell_col_offset;          // compressed column layout
  int full_dimension = 0;

  int dimension() const { return cell_col_offset.empty() ? 0 : cell_col_offset.back(); }
  bool complete() const { return !interfaces.empty(); }
  double reduction_ratio() const { return double(dimension()) / double(full_dimension); }
};

// Keeps mode k of cell C iff exp{-|xi| eff_total h / 2} > delta (tested in log form, 0 < delta < 1).
CompressionIndex select_modes(const Discretization& disc, double delta);
void build_interface_bases(CompressionIndex& index, const Discretization& disc);
CompressionIndex compress(const Discretization& disc, double delta);

// Projected continuity and inflow rows over the selected coefficients.
LinearSystem assemble_compressed(const CompressionIndex& index, const Discretization& disc, const BoundaryData& bc);

// Applies the interface projections to a vector laid out like the rows of
// the full system (e.g. an algebraic right-hand side).
Eigen::VectorXd project_rows(const CompressionIndex& index, const Discretization& disc, const Eigen::VectorXd& full_rows);
SparseMatrix projection_matrix(const CompressionIndex& index, const Discretization& disc);

// Selected coefficients scattered into the full layout, zeros elsewhere.
Eigen::VectorXd expand_selected(const CompressionIndex& index, const Discretization& disc, const Eigen::VectorXd& alpha_delta);

struct LayerReconstruction {
  Eigen::VectorXd alpha;  // full layout, selected + reconstructed layer coefficients
  FluxGrid centers;
};

// Fills unselected coefficients from the smooth trace jumps (interior) and
// the inflow mismatch (boundary).
LayerReconstruction reconstruct_layers(const CompressionIndex& index, const Discretization& disc, const BoundaryData& bc,
                                       const Eigen::VectorXd& alpha_delta);

struct RemainderReport {
  double max_tau = 0.0;       // max over interior interfaces of |tau|_inf
  double max_bound_ratio = 0.0;  // max of |tau| / (dropped terms * delta * |alpha|_inf)
  int worst_interface = -1;
};

// Neglected non-centered dropped terms at interior midpoints for a full coefficient vector.
RemainderReport dropped_remainder(const CompressionIndex& index, const Discretization& disc, const Eigen::VectorXd& alpha);

// |psi - psi_delta|_inf / (delta |alpha_delta|_inf) over matching sample vectors.
double posteriori_ratio(const Eigen::VectorXd& psi_full, const Eigen::VectorXd& psi_delta,
                        const Eigen::VectorXd& alpha_delta, double delta);

}  // namespace rte
