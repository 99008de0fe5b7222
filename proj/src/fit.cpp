#include "rte/assembly.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "rte/error.hpp"

namespace rte {

namespace {

constexpr std::array<Face, 4> kFaces{Face::Left, Face::Right, Face::Bottom, Face::Top};

// Neighbor across a face, -1 at the domain boundary.
int neighbor(const Mesh& mesh, int c, Face f) {
  const Interface& itf = mesh.interface(mesh.face_interface(c, f));
  if (itf.boundary) return -1;
  return itf.minus == c ? itf.plus : itf.minus;
}

}  // namespace

CoefficientFit::CoefficientFit(const Discretization& disc, const std::vector<std::vector<int>>* selected)
    : mesh_(disc.mesh), channels_(disc.quad.size()) {
  const int nd = channels_;
  const int cells = disc.cells();
  const int nm = disc.modes_per_cell();
  if (selected && static_cast<int>(selected->size()) != cells)
    throw ConfigError("CoefficientFit: selection does not cover every cell");

  modes_.resize(cells);
  offsets_.assign(cells + 1, 0);
  particular_.resize(cells);
  for (int c = 0; c < cells; ++c) {
    if (selected) {
      modes_[c] = (*selected)[c];
    } else {
      modes_[c].resize(nm);
      std::iota(modes_[c].begin(), modes_[c].end(), 0);
    }
    offsets_[c + 1] = offsets_[c] + static_cast<int>(modes_[c].size());
    particular_[c] = disc.bases[c].particular();
  }

  const int rows = offsets_.back();
  const int npix = cells;
  offset_ = Eigen::VectorXd::Zero(rows);
  design_.resize(cells);
  std::vector<Eigen::Triplet<double>> trip;

  for (int c = 0; c < cells; ++c) {
    const CellBasis& B = disc.bases[c];
    const int nk = static_cast<int>(modes_[c].size());
    std::array<std::array<double, 2>, kPoints> pts{{{mesh_.x_center(c), mesh_.y_center(c)},
                                                    mesh_.face_midpoint(c, Face::Left),
                                                    mesh_.face_midpoint(c, Face::Right),
                                                    mesh_.face_midpoint(c, Face::Bottom),
                                                    mesh_.face_midpoint(c, Face::Top)}};
    Eigen::MatrixXd F(kPoints * nd, nk);
    for (int p = 0; p < kPoints; ++p)
      for (int j = 0; j < nk; ++j) F.block(p * nd, j, nd, 1) = B.eval(modes_[c][j], pts[p][0], pts[p][1]);
    design_[c] = F;
    if (nk == 0) continue;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(F);
    const Eigen::MatrixXd pinv = cod.pseudoInverse();  // nk x (5 nd)

    // Gather weights from the cell-center grid: point p, sample cell, weight.
    std::array<std::vector<std::pair<int, double>>, kPoints> gather;
    gather[0] = {{c, 1.0}};
    for (int f = 0; f < 4; ++f) {
      const int nb = neighbor(mesh_, c, kFaces[f]);
      if (nb < 0)
        gather[f + 1] = {{c, 1.0}};
      else
        gather[f + 1] = {{c, 0.5}, {nb, 0.5}};
    }
    for (int j = 0; j < nk; ++j) {
      const int out = offsets_[c] + j;
      // Coefficient of pixel (m, cell) accumulated over points.
      for (int m = 0; m < nd; ++m) {
        std::array<std::pair<int, double>, 5> acc{};
        int used = 0;
        for (int p = 0; p < kPoints; ++p) {
          const double coef = pinv(j, p * nd + m);
          for (const auto& [cell, w] : gather[p]) {
            int slot = 0;
            while (slot < used && acc[slot].first != cell) ++slot;
            if (slot == used) acc[used++] = {cell, 0.0};
            acc[slot].second += w * coef;
          }
        }
        for (int s = 0; s < used; ++s)
          if (acc[s].second != 0.0) trip.emplace_back(out, m * npix + acc[s].first, acc[s].second);
      }
      offset_(out) = -particular_[c] * pinv.row(j).sum();
    }
  }
  matrix_.resize(rows, std::size_t(nd) * npix);
  matrix_.setFromTriplets(trip.begin(), trip.end());
  matrix_.makeCompressed();
}

Eigen::VectorXd CoefficientFit::apply(const FluxGrid& psi) const { return apply_linear(psi) + offset_; }

Eigen::VectorXd CoefficientFit::apply_linear(const FluxGrid& psi) const {
  if (psi.channels != channels_ || psi.I != mesh_.I()) throw ConfigError("CoefficientFit: flux grid shape mismatch");
  for (double v : psi.data)
    if (!std::isfinite(v)) throw ConfigError("CoefficientFit: non-finite flux value");
  const Eigen::Map<const Eigen::VectorXd> x(psi.data.data(), static_cast<Eigen::Index>(psi.data.size()));
  return matrix_ * x;
}

Eigen::VectorXd CoefficientFit::samples(const FluxGrid& psi, int c) const {
  const int nd = channels_;
  Eigen::VectorXd s(kPoints * nd);
  for (int m = 0; m < nd; ++m) s(m) = psi.at(m, c);
  for (int f = 0; f < 4; ++f) {
    const int nb = neighbor(mesh_, c, kFaces[f]);
    for (int m = 0; m < nd; ++m) s((f + 1) * nd + m) = nb < 0 ? psi.at(m, c) : 0.5 * (psi.at(m, c) + psi.at(m, nb));
  }
  return s;
}

double CoefficientFit::residual(const FluxGrid& psi, const Eigen::VectorXd& alpha) const {
  if (alpha.size() != offset_.size()) throw ConfigError("CoefficientFit: coefficient vector has the wrong size");
  double worst = 0.0;
  for (int c = 0; c < mesh_.cell_count(); ++c) {
    const int nk = offsets_[c + 1] - offsets_[c];
    Eigen::VectorXd r = samples(psi, c).array() - particular_[c];
    if (nk > 0) r -= design_[c] * alpha.segment(offsets_[c], nk);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace rte
