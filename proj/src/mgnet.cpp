#include "rte/mgnet.hpp"

#include <sstream>

#include "rte/error.hpp"

namespace rte {

namespace {

// conv2d, kernel k, padding k / 2, given stride; weight [out, in, k, k].
FeatureMap conv(const FeatureMap& in, const WeightTensor& w, const WeightTensor& b, int stride) {
  const int out_c = static_cast<int>(w.dims[0]);
  const int in_c = static_cast<int>(w.dims[1]);
  const int k = static_cast<int>(w.dims[2]);
  const int pad = k / 2;
  if (in.C != in_c) throw ConfigError("conv " + w.name + ": input has " + std::to_string(in.C) + " channels");
  const int H = (in.H + 2 * pad - k) / stride + 1;
  const int W = (in.W + 2 * pad - k) / stride + 1;
  FeatureMap out(out_c, H, W);
  for (int o = 0; o < out_c; ++o) {
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = b.data[o];
        for (int i = 0; i < in_c; ++i)
          for (int ky = 0; ky < k; ++ky) {
            const int iy = stride * y - pad + ky;
            if (iy < 0 || iy >= in.H) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = stride * x - pad + kx;
              if (ix < 0 || ix >= in.W) continue;
              s += double(w.data[((std::size_t(o) * in_c + i) * k + ky) * k + kx]) * in.at(i, iy, ix);
            }
          }
        out.at(o, y, x) = s;
      }
  }
  return out;
}

// Transposed conv, kernel 4, stride 2, padding 1; weight [in, out, 4, 4].
FeatureMap conv_transpose(const FeatureMap& in, const WeightTensor& w, const WeightTensor& b) {
  const int in_c = static_cast<int>(w.dims[0]);
  const int out_c = static_cast<int>(w.dims[1]);
  const int k = static_cast<int>(w.dims[2]);
  if (in.C != in_c) throw ConfigError("conv_transpose " + w.name + ": input has " + std::to_string(in.C) + " channels");
  FeatureMap out(out_c, 2 * in.H, 2 * in.W);
  for (int o = 0; o < out_c; ++o)
    for (int y = 0; y < out.H; ++y)
      for (int x = 0; x < out.W; ++x) out.at(o, y, x) = b.data[o];
  for (int i = 0; i < in_c; ++i)
    for (int iy = 0; iy < in.H; ++iy)
      for (int ix = 0; ix < in.W; ++ix) {
        const double v = in.at(i, iy, ix);
        if (v == 0.0) continue;
        for (int o = 0; o < out_c; ++o)
          for (int ky = 0; ky < k; ++ky) {
            const int y = 2 * iy - 1 + ky;
            if (y < 0 || y >= out.H) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int x = 2 * ix - 1 + kx;
              if (x < 0 || x >= out.W) continue;
              out.at(o, y, x) += double(w.data[((std::size_t(i) * out_c + o) * k + ky) * k + kx]) * v;
            }
          }
      }
  return out;
}

FeatureMap layer(const MgNetWeights& w, const std::string& name, const FeatureMap& in, int stride) {
  return conv(in, w.get(name + ".weight"), w.get(name + ".bias"), stride);
}

void relu(FeatureMap& f) {
  for (double& v : f.data) v = v > 0.0 ? v : 0.0;
}

void check_shape(const FeatureMap& f, int C, int H, int W, const char* what) {
  if (f.C != C || f.H != H || f.W != W) {
    std::ostringstream os;
    os << what << ": expected shape (" << C << "," << H << "," << W << "), got (" << f.C << "," << f.H << "," << f.W
       << ")";
    throw ConfigError(os.str());
  }
}

void check_grid(const MgNetWeights& w, int I) {
  if (I <= 0 || I % (1 << (w.L - 1)) != 0)
    throw ConfigError("mgnet: grid size " + std::to_string(I) + " is not divisible by 2^(L-1)");
}

// u <- u + ainv * B(f - a * A(u)), repeated nu times.
void smooth(const MgNetWeights& w, int l, const FeatureMap& f, const FeatureMap& a, const FeatureMap& ainv,
            FeatureMap& u) {
  const std::string A = "mg.A." + std::to_string(l), B = "mg.B." + std::to_string(l);
  for (std::uint32_t s = 0; s < w.nu[l]; ++s) {
    FeatureMap r = layer(w, A, u, 1);
    for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] = f.data[i] - a.data[i] * r.data[i];
    const FeatureMap c = layer(w, B, r, 1);
    for (std::size_t i = 0; i < u.data.size(); ++i) u.data[i] += ainv.data[i] * c.data[i];
  }
}

FeatureMap vcycle(const MgNetWeights& w, int l, const FeatureMap& f, const CoeffNetOutput& co) {
  FeatureMap u(f.C, f.H, f.W);
  smooth(w, l, f, co.a[l], co.ainv[l], u);
  if (l + 1 < static_cast<int>(w.L)) {
    FeatureMap r = layer(w, "mg.A." + std::to_string(l), u, 1);
    for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] = f.data[i] - co.a[l].data[i] * r.data[i];
    const FeatureMap fc = layer(w, "mg.restrict." + std::to_string(l), r, 2);
    const FeatureMap uc = vcycle(w, l + 1, fc, co);
    const std::string p = "mg.prolong." + std::to_string(l);
    const FeatureMap e = conv_transpose(uc, w.get(p + ".weight"), w.get(p + ".bias"));
    for (std::size_t i = 0; i < u.data.size(); ++i) u.data[i] += e.data[i];
    smooth(w, l, f, co.a[l], co.ainv[l], u);
  }
  return u;
}

}  // namespace

FeatureMap coefficient_tensor(const Discretization& disc) {
  const int I = disc.mesh.I();
  FeatureMap t(3, I, I);
  for (int c = 0; c < disc.cells(); ++c) {
    const int i = disc.mesh.cell_i(c), j = disc.mesh.cell_j(c);
    t.at(0, j, i) = disc.coeffs[c].sigma_t;
    t.at(1, j, i) = disc.coeffs[c].sigma_a;
    t.at(2, j, i) = disc.coeffs[c].eps;
  }
  return t;
}

CoeffNetOutput coeffnet_forward(const MgNetWeights& w, const FeatureMap& coeff) {
  check_grid(w, coeff.H);
  check_shape(coeff, 3, static_cast<int>(w.I), static_cast<int>(w.I), "coeffnet input");
  CoeffNetOutput out;
  FeatureMap f = layer(w, "coeff.in", coeff, 1);
  relu(f);
  for (int l = 0; l < static_cast<int>(w.L); ++l) {
    if (l > 0) {
      f = layer(w, "coeff.down." + std::to_string(l), f, 2);
      relu(f);
    }
    out.a.push_back(layer(w, "coeff.a." + std::to_string(l), f, 1));
    out.ainv.push_back(layer(w, "coeff.ainv." + std::to_string(l), f, 1));
  }
  return out;
}

FeatureMap mgnet_forward(const MgNetWeights& w, const FeatureMap& rhs, const CoeffNetOutput& coeff) {
  const int I = static_cast<int>(w.I);
  check_grid(w, rhs.H);
  check_shape(rhs, 4 * static_cast<int>(w.M), I, I, "mgnet rhs");
  if (coeff.a.size() != w.L || coeff.ainv.size() != w.L) throw ConfigError("mgnet: coefficient levels do not match L");
  for (int l = 0; l < static_cast<int>(w.L); ++l) {
    check_shape(coeff.a[l], w.channels(l), I >> l, I >> l, "mgnet a");
    check_shape(coeff.ainv[l], w.channels(l), I >> l, I >> l, "mgnet ainv");
  }
  const FeatureMap f = layer(w, "mg.head_in", rhs, 1);
  const FeatureMap u = vcycle(w, 0, f, coeff);
  return layer(w, "mg.head_out", u, 1);
}

FeatureMap lift_rows(const LinearSystem& sys, const Eigen::VectorXd& v) {
  if (v.size() != sys.size()) throw ConfigError("lift_rows: vector does not match the system");
  FeatureMap t(4 * sys.M, sys.I, sys.I);
  for (Eigen::Index r = 0; r < v.size(); ++r) {
    const int c = sys.row_owner[r];
    t.at(sys.row_local[r], c / sys.I, c % sys.I) += v(r);
  }
  return t;
}

MgNetPreconditioner::MgNetPreconditioner(std::shared_ptr<const MgNetWeights> w, const LinearSystem& sys,
                                         const Discretization& disc, const std::vector<std::vector<int>>* selected)
    : w_(std::move(w)), n_(sys.size()), channels_(4 * sys.M), I_(sys.I) {
  if (!w_) throw ConfigError("MgNetPreconditioner: no weights");
  if (static_cast<int>(w_->M) != sys.M || static_cast<int>(w_->I) != sys.I) {
    std::ostringstream os;
    os << "MgNetPreconditioner: weights were built for M=" << w_->M << ", I=" << w_->I << " but the system has M="
       << sys.M << ", I=" << sys.I;
    throw ConfigError(os.str());
  }
  if (disc.mesh.I() != sys.I || disc.M() != sys.M) throw ConfigError("MgNetPreconditioner: discretization mismatch");
  coeff_ = coeffnet_forward(*w_, coefficient_tensor(disc));
  const CoefficientFit fit(disc, selected);
  if (fit.output_size() != n_) throw ConfigError("MgNetPreconditioner: coefficient fit does not match the system columns");
  fit_ = fit.matrix();
  slot_.resize(n_);
  for (Eigen::Index r = 0; r < n_; ++r) slot_[r] = sys.row_local[r] * sys.I * sys.I + sys.row_owner[r];
}

Eigen::VectorXd MgNetPreconditioner::apply(const Eigen::VectorXd& v) const {
  if (v.size() != n_) throw ConfigError("preconditioner: vector size mismatch");
  FeatureMap rhs(channels_, I_, I_);
  for (Eigen::Index r = 0; r < n_; ++r) rhs.data[slot_[r]] += v(r);
  const FeatureMap out = mgnet_forward(*w_, rhs, coeff_);
  const Eigen::Map<const Eigen::VectorXd> psi(out.data.data(), static_cast<Eigen::Index>(out.data.size()));
  return v + fit_ * psi;
}

}  // namespace rte
