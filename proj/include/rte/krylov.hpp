#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rte/assembly.hpp"

namespace rte {

// Linear map applied to residuals; maps the row space of a system to its
// column space.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Eigen::Index size() const = 0;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& v) const = 0;
  virtual std::string label() const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  explicit IdentityPreconditioner(Eigen::Index n) : n_(n) {}
  Eigen::Index size() const override { return n_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const override;
  std::string label() const override { return "none"; }

 private:
  Eigen::Index n_;
};

// Exact inverse through a dense LU; test fixture and small-system reference.
class DenseInversePreconditioner final : public Preconditioner {
 public:
  explicit DenseInversePreconditioner(const SparseMatrix& A);
  Eigen::Index size() const override { return lu_.rows(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const override;
  std::string label() const override { return "dense-inverse"; }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

// Per-cell LU of the rows owned by a cell restricted to that cell's columns.
class BlockJacobi final : public Preconditioner {
 public:
  explicit BlockJacobi(const LinearSystem& sys);
  Eigen::Index size() const override { return n_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const override;
  std::string label() const override { return "bjacobi"; }
  int blocks() const { return static_cast<int>(lu_.size()); }

 private:
  Eigen::Index n_ = 0;
  std::vector<std::vector<int>> rows_;
  std::vector<int> col_begin_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

struct GmresOptions {
  double tol = 1e-8;
  int restart = 50;
  int maxit = 5000;  // total inner iterations
};

struct SolveReport {
  int iterations = 0;
  int restarts = 0;
  // Relative preconditioned residual: initial value, then one entry per inner
  // iteration. The last entry of each cycle is the recomputed true residual.
  std::vector<double> history;
  bool converged = false;
  bool breakdown = false;
  double final_residual = 0.0;
  double wall_seconds = 0.0;
  std::string preconditioner = "none";
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveReport report;
};

// Left-preconditioned restarted GMRES from a zero initial guess. Converged
// iff |P(b - A x)| <= tol |P b|.
SolveResult gmres(const SparseMatrix& A, const Eigen::VectorXd& b, const Preconditioner* precond,
                  const GmresOptions& opts = {});
inline SolveResult gmres(const LinearSystem& sys, const Preconditioner* precond, const GmresOptions& opts = {}) {
  return gmres(sys.A, sys.b, precond, opts);
}

}  // namespace rte
