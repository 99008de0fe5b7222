#include "rte/krylov.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "rte/error.hpp"

namespace rte {

namespace {

constexpr double kBreakdown = 1e-14;

}  // namespace

Eigen::VectorXd IdentityPreconditioner::apply(const Eigen::VectorXd& v) const {
  if (v.size() != n_) throw ConfigError("preconditioner: vector size mismatch");
  return v;
}

DenseInversePreconditioner::DenseInversePreconditioner(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw ConfigError("DenseInversePreconditioner: matrix is not square");
  lu_.compute(Eigen::MatrixXd(A));
}

Eigen::VectorXd DenseInversePreconditioner::apply(const Eigen::VectorXd& v) const {
  if (v.size() != lu_.rows()) throw ConfigError("preconditioner: vector size mismatch");
  return lu_.solve(v);
}

BlockJacobi::BlockJacobi(const LinearSystem& sys) : n_(sys.size()) {
  const int cells = sys.cells();
  if (cells <= 0 || static_cast<Eigen::Index>(sys.row_owner.size()) != n_)
    throw ConfigError("BlockJacobi: system carries no block metadata");
  rows_.resize(cells);
  for (Eigen::Index r = 0; r < n_; ++r) rows_[sys.row_owner[r]].push_back(static_cast<int>(r));
  col_begin_.assign(sys.cell_col_offset.begin(), sys.cell_col_offset.end());
  lu_.resize(cells);
  for (int c = 0; c < cells; ++c) {
    const int nc = sys.cell_columns(c);
    if (static_cast<int>(rows_[c].size()) != nc) {
      std::ostringstream os;
      os << "BlockJacobi: cell " << c << " owns " << rows_[c].size() << " rows but has " << nc << " columns";
      throw ConfigError(os.str());
    }
    if (nc == 0) continue;
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(nc, nc);
    for (int a = 0; a < nc; ++a)
      for (SparseMatrix::InnerIterator it(sys.A, rows_[c][a]); it; ++it) {
        const int j = static_cast<int>(it.col()) - col_begin_[c];
        if (j >= 0 && j < nc) blk(a, j) = it.value();
      }
    lu_[c].compute(blk);
    if (!(lu_[c].rcond() > kBreakdown)) {
      std::ostringstream os;
      os << "BlockJacobi: singular diagonal block for cell " << c;
      throw NumericalError(os.str());
    }
  }
}

Eigen::VectorXd BlockJacobi::apply(const Eigen::VectorXd& v) const {
  if (v.size() != n_) throw ConfigError("preconditioner: vector size mismatch");
  Eigen::VectorXd out(n_);
  for (std::size_t c = 0; c < lu_.size(); ++c) {
    const auto& rows = rows_[c];
    if (rows.empty()) continue;
    Eigen::VectorXd seg(rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a) seg(a) = v(rows[a]);
    out.segment(col_begin_[c], rows.size()) = lu_[c].solve(seg);
  }
  return out;
}

SolveResult gmres(const SparseMatrix& A, const Eigen::VectorXd& b, const Preconditioner* precond,
                  const GmresOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = A.rows();
  if (A.cols() != n || b.size() != n) throw ConfigError("gmres: system is not square");
  if (!(opts.tol > 0.0)) throw ConfigError("gmres: tol must be positive");
  if (opts.restart < 1) throw ConfigError("gmres: restart must be at least 1");
  if (opts.maxit < 0) throw ConfigError("gmres: maxit must be nonnegative");
  if (precond && precond->size() != n) throw ConfigError("gmres: preconditioner size does not match the system");

  auto prec = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return precond ? precond->apply(v) : v; };

  SolveResult res;
  res.report.preconditioner = precond ? precond->label() : "none";
  res.x = Eigen::VectorXd::Zero(n);
  auto finish = [&]() {
    res.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };

  const double bnorm = prec(b).norm();
  if (bnorm == 0.0) {
    res.report.converged = true;
    return finish();
  }

  const int m = opts.restart;
  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  Eigen::VectorXd r = prec(b - A * res.x);
  double beta = r.norm();
  res.report.history.push_back(beta / bnorm);
  if (beta / bnorm <= opts.tol) {
    res.report.converged = true;
    res.report.final_residual = beta / bnorm;
    return finish();
  }

  while (res.report.iterations < opts.maxit) {
    V.col(0) = r / beta;
    H.setZero();
    g.setZero();
    g(0) = beta;
    int j = 0;
    bool broke = false;
    for (; j < m && res.report.iterations < opts.maxit; ++j) {
      Eigen::VectorXd w = prec(A * V.col(j));
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          const double h = V.col(i).dot(w);
          H(i, j) += h;
          w -= h * V.col(i);
        }
      const double hn = w.norm();
      H(j + 1, j) = hn;
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs(j) = denom == 0.0 ? 1.0 : H(j, j) / denom;
      sn(j) = denom == 0.0 ? 0.0 : H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      ++res.report.iterations;
      const double est = std::abs(g(j + 1)) / bnorm;
      res.report.history.push_back(est);
      if (hn < kBreakdown) {
        broke = true;
        ++j;
        break;
      }
      V.col(j + 1) = w / hn;
      if (est <= opts.tol) {
        ++j;
        break;
      }
    }
    // x += V y with H y = g on the leading j x j block.
    if (j > 0) {
      const Eigen::VectorXd y =
          H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
      res.x += V.leftCols(j) * y;
    }
    r = prec(b - A * res.x);
    beta = r.norm();
    const double rel = beta / bnorm;
    res.report.history.back() = rel;
    res.report.final_residual = rel;
    if (rel <= opts.tol) {
      res.report.converged = true;
      break;
    }
    if (broke) {
      res.report.breakdown = true;
      break;
    }
    if (res.report.iterations >= opts.maxit) break;
    ++res.report.restarts;
  }
  if (!res.x.allFinite()) throw NumericalError("gmres: iterate became non-finite");
  return finish();
}

}  // namespace rte
