#include "rte/tfps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "rte/error.hpp"
#include "rte/parallel.hpp"

namespace rte {

namespace {

// Deterministic basis of the span of `cols`: orthonormalize, then pick
// projected coordinate vectors greedily (largest remaining norm, lowest index
// on ties).
Eigen::MatrixXd canonical_group_basis(const Eigen::MatrixXd& cols) {
  const int n = static_cast<int>(cols.rows());
  const int d = static_cast<int>(cols.cols());
  if (d == 1) return cols;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(cols);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
  Eigen::MatrixXd chosen(n, 0);
  for (int r = 0; r < d; ++r) {
    Eigen::VectorXd best;
    double best_norm = -1.0;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd p = Q * Q.row(i).transpose();
      if (chosen.cols() > 0) p -= chosen * (chosen.transpose() * p);
      const double nrm = p.norm();
      if (nrm > best_norm * (1.0 + 1e-12)) {
        best_norm = nrm;
        best = p;
      }
    }
    chosen.conservativeResize(n, r + 1);
    chosen.col(r) = best / best_norm;
  }
  return chosen;
}

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double amax = v.cwiseAbs().maxCoeff();
  int pivot = 0;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= amax * (1.0 - 1e-10)) {
      pivot = i;
      break;
    }
  }
  v /= std::copysign(amax, v(pivot));
}

// Solves (W - (1-rho) W K W) l = -xi (W D) l for the diagonal direction
// cosines D via Cholesky reduction to a symmetric standard problem.
void axis_problem(const Eigen::MatrixXd& P, const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& wd,
                  const Eigen::MatrixXd& KW, double rho, const Eigen::VectorXd& cosines, int M,
                  Eigen::VectorXd& xi_out, Eigen::MatrixXd& l_out, double& residual) {
  (void)P;
  const int n = static_cast<int>(wd.size());
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd Linv = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd S = Linv * wd.asDiagonal() * Linv.transpose();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("tfps: symmetric eigensolver failed");

  std::vector<double> xi(n);
  Eigen::MatrixXd l = L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  for (int i = 0; i < n; ++i) {
    const double mu = es.eigenvalues()(i);
    if (!std::isfinite(mu) || mu == 0.0) throw NumericalError("tfps: singular direction matrix");
    xi[i] = -1.0 / mu;
    if (!std::isfinite(xi[i]) || std::abs(xi[i]) < 1e-14) {
      std::ostringstream os;
      os << "tfps: near-zero eigenvalue " << xi[i] << " (rho=" << rho << ")";
      throw NumericalError(os.str());
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return xi[a] < xi[b]; });

  xi_out.resize(n);
  l_out.resize(n, n);
  for (int i = 0; i < n; ++i) {
    xi_out(i) = xi[order[i]];
    l_out.col(i) = l.col(order[i]);
  }
  const int negatives = static_cast<int>(std::count_if(xi.begin(), xi.end(), [](double v) { return v < 0.0; }));
  if (negatives != 2 * M) {
    throw NumericalError("tfps: eigenvalues not sign split (" + std::to_string(negatives) + " negative of " +
                         std::to_string(n) + ")");
  }

  // Canonicalize clusters of (numerically) equal eigenvalues.
  for (int start = 0; start < n;) {
    int end = start + 1;
    while (end < n && std::abs(xi_out(end) - xi_out(start)) <= 1e-9 * std::max(std::abs(xi_out(end)), std::abs(xi_out(start))))
      ++end;
    if (end - start > 1) {
      const double mean = xi_out.segment(start, end - start).mean();
      l_out.middleCols(start, end - start) = canonical_group_basis(l_out.middleCols(start, end - start));
      xi_out.segment(start, end - start).setConstant(mean);
    }
    start = end;
  }
  for (int i = 0; i < n; ++i) normalize_sign(l_out.col(i));

  residual = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd kl = KW * l_out.col(i);
    const Eigen::VectorXd r = (kl - l_out.col(i)) - rho * kl - xi_out(i) * cosines.cwiseProduct(l_out.col(i));
    residual = std::max(residual, r.cwiseAbs().maxCoeff());
  }
}

}  // namespace

EigenData solve_cell_eigenproblem(const AngularQuadrature& quad, double rho) {
  if (!quad.has_kernel()) throw ConfigError("tfps: quadrature has no scattering kernel");
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("tfps: scattering ratio must satisfy 0 <= gamma < 1");
  const int n = quad.size();
  Eigen::VectorXd c(n), s(n);
  for (int m = 0; m < n; ++m) {
    c(m) = quad.directions[m].c;
    s(m) = quad.directions[m].s;
    if (c(m) == 0.0 || s(m) == 0.0) throw ConfigError("tfps: direction with a zero component");
  }
  const Eigen::VectorXd& w = quad.weights;
  const Eigen::MatrixXd KW = quad.kernel * w.asDiagonal();
  const Eigen::MatrixXd WKW = w.asDiagonal() * KW;
  // W - WKW is singular (constants), add the absorption part separately.
  Eigen::MatrixXd P = Eigen::MatrixXd(w.asDiagonal()) - WKW + rho * WKW;
  P = 0.5 * (P + P.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "tfps: scattering operator not definite (rho=" << rho << "); spectrum may be complex";
    throw NumericalError(os.str());
  }

  EigenData e;
  e.rho = rho;
  double rx = 0.0, ry = 0.0;
  axis_problem(P, llt, w.cwiseProduct(c), KW, rho, c, quad.M, e.xi_x, e.lx, rx);
  axis_problem(P, llt, w.cwiseProduct(s), KW, rho, s, quad.M, e.xi_y, e.ly, ry);
  e.max_residual = std::max(rx, ry);
  if (e.max_residual > 1e-10) {
    std::ostringstream os;
    os << "tfps: eigen residual " << e.max_residual << " exceeds 1e-10 (rho=" << rho << ")";
    throw NumericalError(os.str());
  }
  return e;
}

double BasisCache::round_key(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", rho);
  return std::strtod(buf, nullptr);
}

std::shared_ptr<const EigenData> BasisCache::get(double rho) {
  const double key = round_key(rho);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto data = std::make_shared<const EigenData>(solve_cell_eigenproblem(quad_, key));
  std::lock_guard lock(mutex_);
  return entries_.try_emplace(key, std::move(data)).first->second;
}

std::size_t BasisCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

CellBasis::CellBasis(std::shared_ptr<const EigenData> eig, int M, double eff_total, double h, double x0, double y0,
                     double particular)
    : eig_(std::move(eig)), M_(M), eff_total_(eff_total), h_(h), x0_(x0), y0_(y0), particular_(particular) {}

double CellBasis::xi(int k) const { return is_x_mode(k) ? eig_->xi_x(k) : eig_->xi_y(k - 4 * M_); }

Eigen::Ref<const Eigen::VectorXd> CellBasis::eigenvector(int k) const {
  return is_x_mode(k) ? eig_->lx.col(k) : eig_->ly.col(k - 4 * M_);
}

Eigen::Vector2d CellBasis::reference_point(int k) const {
  const double xc = x0_ + 0.5 * h_, yc = y0_ + 0.5 * h_;
  switch (face(k)) {
    case Face::Left:
      return {x0_, yc};
    case Face::Right:
      return {x0_ + h_, yc};
    case Face::Bottom:
      return {xc, y0_};
    case Face::Top:
      return {xc, y0_ + h_};
  }
  return {xc, yc};
}

double CellBasis::decay(int k) const { return std::exp(-0.5 * std::abs(xi(k)) * eff_total_ * h_); }

void CellBasis::check_inside(double x, double y) const {
  const double tol = 1e-12;
  if (x < x0_ - tol || x > x0_ + h_ + tol || y < y0_ - tol || y > y0_ + h_ + tol) {
    std::ostringstream os;
    os << "point (" << x << ", " << y << ") outside cell [" << x0_ << ", " << x0_ + h_ << "] x [" << y0_ << ", "
       << y0_ + h_ << "]";
    throw ConfigError(os.str());
  }
}

double CellBasis::factor(int k, double x, double y) const {
  check_inside(x, y);
  const Eigen::Vector2d z = reference_point(k);
  const double delta = is_x_mode(k) ? x - z.x() : y - z.y();
  return std::exp(eff_total_ * xi(k) * delta);
}

Eigen::VectorXd CellBasis::eval(int k, double x, double y) const { return factor(k, x, y) * eigenvector(k); }

CellBasis build_cell_basis(const CellCoefficients& coeff, BasisCache& cache, double h, double x0, double y0) {
  return CellBasis(cache.get(coeff.rho), cache.quadrature().M, coeff.eff_total, h, x0, y0, coeff.particular());
}

Discretization discretize(const Mesh& mesh, const AngularQuadrature& quad, std::vector<CellCoefficients> coeffs,
                          BasisCache* cache, int threads) {
  if (static_cast<int>(coeffs.size()) != mesh.cell_count())
    throw ConfigError("discretize: coefficient count does not match the mesh");
  std::unique_ptr<BasisCache> own;
  if (!cache) {
    own = std::make_unique<BasisCache>(quad);
    cache = own.get();
  } else if (cache->quadrature().M != quad.M || cache->quadrature().anisotropy != quad.anisotropy) {
    throw ConfigError("discretize: basis cache built for a different quadrature");
  }
  Discretization d{mesh, quad, std::move(coeffs), {}};
  d.bases.resize(d.coeffs.size());
  parallel_for(
      d.coeffs.size(),
      [&](std::size_t c) {
        const int ci = static_cast<int>(c);
        d.bases[c] = build_cell_basis(d.coeffs[c], *cache, mesh.h(), mesh.x_left(ci), mesh.y_bottom(ci));
      },
      threads);
  return d;
}

Discretization discretize(const MediumField& medium, int I, const AngularQuadrature& quad, BasisCache* cache,
                          int threads) {
  Mesh mesh(I);
  return discretize(mesh, quad, cell_average(medium, I), cache, threads);
}

}  // namespace rte
