#pragma once

#include <Eigen/Core>
#include <vector>

namespace cst::net {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dense rank-3 feature map with channel-planar storage:
/// value(c, h, w) = data[c * rows * cols + h * cols + w].
struct Tensor3 {
  int rows = 0, cols = 0, channels = 0;
  VectorXd data;

  Tensor3() = default;
  Tensor3(int h, int w, int c)
      : rows(h), cols(w), channels(c), data(VectorXd::Zero(std::ptrdiff_t(h) * w * c)) {}

  std::ptrdiff_t plane_size() const { return std::ptrdiff_t(rows) * cols; }
  double& at(int c, int h, int w) { return data[c * plane_size() + h * std::ptrdiff_t(cols) + w]; }
  double at(int c, int h, int w) const { return data[c * plane_size() + h * std::ptrdiff_t(cols) + w]; }
  Eigen::Map<VectorXd> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
  Eigen::Map<const VectorXd> plane(int c) const { return {data.data() + c * plane_size(), plane_size()}; }
};

using Batch3 = std::vector<Tensor3>;

/// Static shape of a convolution: cross-correlation with zero padding.
struct ConvSpec {
  int kh = 3, kw = 3;
  int cin = 1, cout = 1;
  int sh = 1, sw = 1;
  int ph = 0, pw = 0;

  int out_h(int in_h) const { return (in_h + 2 * ph - kh) / sh + 1; }
  int out_w(int in_w) const { return (in_w + 2 * pw - kw) / sw + 1; }
  std::ptrdiff_t kernel_rows() const { return std::ptrdiff_t(kh) * kw * cin; }
};

/// Gathers convolution patches: row c*(kh*kw) + dy*kw + dx, one column per
/// output position in row-major (oy, ox) order. Out-of-bounds taps are zero.
MatrixXd im2col(const Tensor3& x, const ConvSpec& spec);

Tensor3 conv2d_forward(const Tensor3& x, const MatrixXd& kernel, const ConvSpec& spec);

struct ConvCache {
  std::vector<MatrixXd> patches;
  int in_h = 0, in_w = 0;
};

Batch3 conv2d_forward(const Batch3& x, const MatrixXd& kernel, const ConvSpec& spec,
                      ConvCache* cache = nullptr);

/// Returns gradients w.r.t. the inputs and accumulates into dkernel.
Batch3 conv2d_backward(const Batch3& dout, const MatrixXd& kernel, const ConvSpec& spec,
                       const ConvCache& cache, MatrixXd& dkernel);

/// Batch-normalisation parameters for one set of channels/units.
/// Running statistics follow running <- 0.9 running + 0.1 batch.
struct BnParams {
  VectorXd gamma, beta;
  VectorXd running_mean, running_var;

  explicit BnParams(int channels = 0)
      : gamma(VectorXd::Ones(channels)),
        beta(VectorXd::Zero(channels)),
        running_mean(VectorXd::Zero(channels)),
        running_var(VectorXd::Ones(channels)) {}
};

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.9;

struct BnConvCache {
  Batch3 xhat;
  VectorXd inv_std;
};

/// Train-mode BN over batch and spatial positions per channel; updates the
/// running statistics. Throws NumericError for a batch of one example.
Batch3 batchnorm_conv_train(const Batch3& x, BnParams& params, BnConvCache& cache);
Tensor3 batchnorm_conv_infer(const Tensor3& x, const BnParams& params);
Batch3 batchnorm_conv_backward(const Batch3& dy, const BnParams& params,
                               const BnConvCache& cache, VectorXd& dgamma,
                               VectorXd& dbeta);

struct BnFcCache {
  MatrixXd xhat;
  VectorXd inv_std;
};

/// Train-mode BN per unit (row) over the batch (columns).
MatrixXd batchnorm_fc_train(const MatrixXd& x, BnParams& params, BnFcCache& cache);
VectorXd batchnorm_fc_infer(const VectorXd& x, const BnParams& params);
MatrixXd batchnorm_fc_backward(const MatrixXd& dy, const BnParams& params,
                               const BnFcCache& cache, VectorXd& dgamma,
                               VectorXd& dbeta);

/// PReLU with one learnable slope per channel (conv) or per unit (fc rows).
Batch3 prelu_conv_forward(const Batch3& x, const VectorXd& slope);
Batch3 prelu_conv_backward(const Batch3& dy, const Batch3& x_pre, const VectorXd& slope,
                           VectorXd& dslope);
MatrixXd prelu_fc_forward(const MatrixXd& x, const VectorXd& slope);
VectorXd prelu_fc_forward(const VectorXd& x, const VectorXd& slope);
MatrixXd prelu_fc_backward(const MatrixXd& dy, const MatrixXd& x_pre,
                           const VectorXd& slope, VectorXd& dslope);

}  // namespace cst::net
