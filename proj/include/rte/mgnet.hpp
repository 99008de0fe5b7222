#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rte/assembly.hpp"
#include "rte/krylov.hpp"

namespace rte {

struct WeightTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
  std::size_t numel() const;
};

// CoeffNet + MgNet parameters. Tensors keep their file order so that a load
// followed by a write reproduces the file byte for byte.
struct MgNetWeights {
  static constexpr std::uint32_t kVersion = 1;
  std::uint32_t version = kVersion;
  std::uint32_t L = 1;
  std::uint32_t C0 = 3;
  std::uint32_t M = 1;
  std::uint32_t I = 0;
  std::vector<std::uint32_t> nu;  // smoothing steps per level
  std::vector<WeightTensor> tensors;

  int channels(int level) const { return static_cast<int>(C0) << level; }
  const WeightTensor& get(const std::string& name) const;
  WeightTensor* find(const std::string& name);
};

// Expected tensor names and shapes for an architecture, in canonical order.
std::vector<WeightTensor> weight_layout(std::uint32_t L, std::uint32_t C0, std::uint32_t M);

// Checks the header and every tensor shape against the schedule; throws
// FormatError naming the offending field.
void validate_weights(const MgNetWeights& w);

MgNetWeights load_weights(const std::string& path);
MgNetWeights parse_weights(const std::vector<std::uint8_t>& bytes, const std::string& source = "weights");
void write_weights(const MgNetWeights& w, const std::string& path);
std::vector<std::uint8_t> serialize_weights(const MgNetWeights& w);

// All-zero weights (scale == 0) or i.i.d. N(0, scale^2 / fan_in) kernels with zero biases.
MgNetWeights make_weights(std::uint32_t L, std::uint32_t C0, std::uint32_t M, std::uint32_t I,
                          std::vector<std::uint32_t> nu, double scale, std::uint64_t seed);

// C x H x W feature map.
struct FeatureMap {
  int C = 0;
  int H = 0;
  int W = 0;
  std::vector<double> data;
  FeatureMap() = default;
  FeatureMap(int C, int H, int W) : C(C), H(H), W(W), data(std::size_t(C) * H * W, 0.0) {}
  double& at(int c, int y, int x) { return data[(std::size_t(c) * H + y) * W + x]; }
  double at(int c, int y, int x) const { return data[(std::size_t(c) * H + y) * W + x]; }
};

// Channels: cell-average sigma_T, sigma_a and epsilon at cell centers.
FeatureMap coefficient_tensor(const Discretization& disc);

struct CoeffNetOutput {
  std::vector<FeatureMap> a;
  std::vector<FeatureMap> ainv;
};

CoeffNetOutput coeffnet_forward(const MgNetWeights& w, const FeatureMap& coeff);
// R = 4M input channels, 4M output channels, I x I spatial.
FeatureMap mgnet_forward(const MgNetWeights& w, const FeatureMap& rhs, const CoeffNetOutput& coeff);

// Row residual scattered to (owning cell, row_local) slots, summing collisions.
FeatureMap lift_rows(const LinearSystem& sys, const Eigen::VectorXd& v);

// apply(v) = v + D0(mgnet(lift(v))), D0 the linear part of the coefficient
// fit restricted to the system's columns.
class MgNetPreconditioner final : public Preconditioner {
 public:
  MgNetPreconditioner(std::shared_ptr<const MgNetWeights> w, const LinearSystem& sys, const Discretization& disc,
                      const std::vector<std::vector<int>>* selected = nullptr);
  Eigen::Index size() const override { return n_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const override;
  std::string label() const override { return label_; }
  void set_label(std::string s) { label_ = std::move(s); }

 private:
  std::shared_ptr<const MgNetWeights> w_;
  Eigen::Index n_ = 0;
  int channels_ = 0;
  int I_ = 0;
  std::vector<int> slot_;  // row -> flat (channel, cell) index
  CoeffNetOutput coeff_;
  SparseMatrix fit_;
  std::string label_ = "mgnet";
};

}  // namespace rte
