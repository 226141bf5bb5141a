#include "cst/net/ops.hpp"

#include <cmath>

#include "cst/errors.hpp"

namespace cst::net {

MatrixXd im2col(const Tensor3& x, const ConvSpec& spec) {
  const int oh = spec.out_h(x.rows);
  const int ow = spec.out_w(x.cols);
  if (oh < 1 || ow < 1) throw CompatError("convolution input smaller than kernel");
  if (x.channels != spec.cin) throw CompatError("convolution channel mismatch");
  MatrixXd patches = MatrixXd::Zero(spec.kernel_rows(), std::ptrdiff_t(oh) * ow);
  for (int c = 0; c < spec.cin; ++c) {
    for (int dy = 0; dy < spec.kh; ++dy) {
      for (int dx = 0; dx < spec.kw; ++dx) {
        const std::ptrdiff_t p = (std::ptrdiff_t(c) * spec.kh + dy) * spec.kw + dx;
        for (int oy = 0; oy < oh; ++oy) {
          const int ih = oy * spec.sh - spec.ph + dy;
          if (ih < 0 || ih >= x.rows) continue;
          for (int ox = 0; ox < ow; ++ox) {
            const int iw = ox * spec.sw - spec.pw + dx;
            if (iw < 0 || iw >= x.cols) continue;
            patches(p, std::ptrdiff_t(oy) * ow + ox) = x.at(c, ih, iw);
          }
        }
      }
    }
  }
  return patches;
}

Tensor3 conv2d_forward(const Tensor3& x, const MatrixXd& kernel, const ConvSpec& spec) {
  if (kernel.rows() != spec.kernel_rows() || kernel.cols() != spec.cout)
    throw CompatError("convolution kernel shape mismatch");
  const int oh = spec.out_h(x.rows);
  const int ow = spec.out_w(x.cols);
  const MatrixXd patches = im2col(x, spec);
  Tensor3 out(oh, ow, spec.cout);
  // Row c of kernel^T * patches is exactly channel plane c.
  Eigen::Map<MatrixXd>(out.data.data(), std::ptrdiff_t(oh) * ow, spec.cout).noalias() =
      patches.transpose() * kernel;
  return out;
}

Batch3 conv2d_forward(const Batch3& x, const MatrixXd& kernel, const ConvSpec& spec,
                      ConvCache* cache) {
  Batch3 out;
  out.reserve(x.size());
  if (cache) {
    cache->patches.clear();
    cache->patches.reserve(x.size());
    if (!x.empty()) {
      cache->in_h = x.front().rows;
      cache->in_w = x.front().cols;
    }
  }
  for (const Tensor3& xe : x) {
    const int oh = spec.out_h(xe.rows);
    const int ow = spec.out_w(xe.cols);
    MatrixXd patches = im2col(xe, spec);
    Tensor3 oe(oh, ow, spec.cout);
    Eigen::Map<MatrixXd>(oe.data.data(), std::ptrdiff_t(oh) * ow, spec.cout).noalias() =
        patches.transpose() * kernel;
    out.push_back(std::move(oe));
    if (cache) cache->patches.push_back(std::move(patches));
  }
  return out;
}

Batch3 conv2d_backward(const Batch3& dout, const MatrixXd& kernel, const ConvSpec& spec,
                       const ConvCache& cache, MatrixXd& dkernel) {
  Batch3 dx;
  dx.reserve(dout.size());
  for (std::size_t e = 0; e < dout.size(); ++e) {
    const Tensor3& de = dout[e];
    const int oh = de.rows, ow = de.cols;
    const Eigen::Map<const MatrixXd> dmat(de.data.data(), std::ptrdiff_t(oh) * ow, spec.cout);
    dkernel.noalias() += cache.patches[e] * dmat;
    const MatrixXd dpatches = kernel * dmat.transpose();  // kernel_rows x oh*ow
    Tensor3 dxe(cache.in_h, cache.in_w, spec.cin);
    for (int c = 0; c < spec.cin; ++c) {
      for (int dy = 0; dy < spec.kh; ++dy) {
        for (int dx2 = 0; dx2 < spec.kw; ++dx2) {
          const std::ptrdiff_t p = (std::ptrdiff_t(c) * spec.kh + dy) * spec.kw + dx2;
          for (int oy = 0; oy < oh; ++oy) {
            const int ih = oy * spec.sh - spec.ph + dy;
            if (ih < 0 || ih >= cache.in_h) continue;
            for (int ox = 0; ox < ow; ++ox) {
              const int iw = ox * spec.sw - spec.pw + dx2;
              if (iw < 0 || iw >= cache.in_w) continue;
              dxe.at(c, ih, iw) += dpatches(p, std::ptrdiff_t(oy) * ow + ox);
            }
          }
        }
      }
    }
    dx.push_back(std::move(dxe));
  }
  return dx;
}

Batch3 batchnorm_conv_train(const Batch3& x, BnParams& params, BnConvCache& cache) {
  if (x.size() < 2) throw NumericError("train-mode batch normalisation needs batch >= 2");
  const int channels = x.front().channels;
  const std::ptrdiff_t plane = x.front().plane_size();
  const double count = static_cast<double>(x.size()) * static_cast<double>(plane);

  VectorXd mean = VectorXd::Zero(channels);
  VectorXd var = VectorXd::Zero(channels);
  for (const Tensor3& xe : x)
    for (int c = 0; c < channels; ++c) mean[c] += xe.plane(c).sum();
  mean /= count;
  for (const Tensor3& xe : x)
    for (int c = 0; c < channels; ++c)
      var[c] += (xe.plane(c).array() - mean[c]).square().sum();
  var /= count;

  cache.inv_std = (var.array() + kBnEps).rsqrt();
  cache.xhat.clear();
  cache.xhat.reserve(x.size());
  Batch3 out;
  out.reserve(x.size());
  for (const Tensor3& xe : x) {
    Tensor3 xh(xe.rows, xe.cols, channels);
    Tensor3 ye(xe.rows, xe.cols, channels);
    for (int c = 0; c < channels; ++c) {
      xh.plane(c) = (xe.plane(c).array() - mean[c]) * cache.inv_std[c];
      ye.plane(c) = params.gamma[c] * xh.plane(c).array() + params.beta[c];
    }
    cache.xhat.push_back(std::move(xh));
    out.push_back(std::move(ye));
  }
  params.running_mean = kBnMomentum * params.running_mean + (1.0 - kBnMomentum) * mean;
  params.running_var = kBnMomentum * params.running_var + (1.0 - kBnMomentum) * var;
  return out;
}

Tensor3 batchnorm_conv_infer(const Tensor3& x, const BnParams& params) {
  Tensor3 out(x.rows, x.cols, x.channels);
  for (int c = 0; c < x.channels; ++c) {
    const double inv = 1.0 / std::sqrt(params.running_var[c] + kBnEps);
    out.plane(c) =
        params.gamma[c] * inv * (x.plane(c).array() - params.running_mean[c]) + params.beta[c];
  }
  return out;
}

Batch3 batchnorm_conv_backward(const Batch3& dy, const BnParams& params,
                               const BnConvCache& cache, VectorXd& dgamma,
                               VectorXd& dbeta) {
  const int channels = dy.front().channels;
  const std::ptrdiff_t plane = dy.front().plane_size();
  const double count = static_cast<double>(dy.size()) * static_cast<double>(plane);

  VectorXd sum_dy = VectorXd::Zero(channels);
  VectorXd sum_dy_xhat = VectorXd::Zero(channels);
  for (std::size_t e = 0; e < dy.size(); ++e)
    for (int c = 0; c < channels; ++c) {
      sum_dy[c] += dy[e].plane(c).sum();
      sum_dy_xhat[c] += dy[e].plane(c).dot(cache.xhat[e].plane(c));
    }
  dgamma += sum_dy_xhat;
  dbeta += sum_dy;

  Batch3 dx;
  dx.reserve(dy.size());
  for (std::size_t e = 0; e < dy.size(); ++e) {
    Tensor3 dxe(dy[e].rows, dy[e].cols, channels);
    for (int c = 0; c < channels; ++c) {
      const double scale = params.gamma[c] * cache.inv_std[c];
      dxe.plane(c) = scale * (dy[e].plane(c).array() - sum_dy[c] / count -
                              cache.xhat[e].plane(c).array() * (sum_dy_xhat[c] / count));
    }
    dx.push_back(std::move(dxe));
  }
  return dx;
}

MatrixXd batchnorm_fc_train(const MatrixXd& x, BnParams& params, BnFcCache& cache) {
  if (x.cols() < 2) throw NumericError("train-mode batch normalisation needs batch >= 2");
  const double count = static_cast<double>(x.cols());
  const VectorXd mean = x.rowwise().mean();
  const VectorXd var = (x.colwise() - mean).array().square().rowwise().sum() / count;
  cache.inv_std = (var.array() + kBnEps).rsqrt();
  cache.xhat = (x.colwise() - mean).array().colwise() * cache.inv_std.array();
  params.running_mean = kBnMomentum * params.running_mean + (1.0 - kBnMomentum) * mean;
  params.running_var = kBnMomentum * params.running_var + (1.0 - kBnMomentum) * var;
  return (cache.xhat.array().colwise() * params.gamma.array()).colwise() +
         params.beta.array();
}

VectorXd batchnorm_fc_infer(const VectorXd& x, const BnParams& params) {
  const Eigen::ArrayXd inv = (params.running_var.array() + kBnEps).rsqrt();
  return params.gamma.array() * inv * (x.array() - params.running_mean.array()) +
         params.beta.array();
}

MatrixXd batchnorm_fc_backward(const MatrixXd& dy, const BnParams& params,
                               const BnFcCache& cache, VectorXd& dgamma,
                               VectorXd& dbeta) {
  const double count = static_cast<double>(dy.cols());
  const VectorXd sum_dy = dy.rowwise().sum();
  const VectorXd sum_dy_xhat = (dy.array() * cache.xhat.array()).rowwise().sum();
  dgamma += sum_dy_xhat;
  dbeta += sum_dy;
  const Eigen::ArrayXd scale = params.gamma.array() * cache.inv_std.array();
  MatrixXd dx = dy;
  dx.colwise() -= sum_dy / count;
  dx.array() -= cache.xhat.array().colwise() * (sum_dy_xhat.array() / count);
  dx.array().colwise() *= scale;
  return dx;
}

Batch3 prelu_conv_forward(const Batch3& x, const VectorXd& slope) {
  Batch3 out;
  out.reserve(x.size());
  for (const Tensor3& xe : x) {
    Tensor3 ye(xe.rows, xe.cols, xe.channels);
    for (int c = 0; c < xe.channels; ++c)
      ye.plane(c) = xe.plane(c).array().max(0.0) + slope[c] * xe.plane(c).array().min(0.0);
    out.push_back(std::move(ye));
  }
  return out;
}

Batch3 prelu_conv_backward(const Batch3& dy, const Batch3& x_pre, const VectorXd& slope,
                           VectorXd& dslope) {
  Batch3 dx;
  dx.reserve(dy.size());
  for (std::size_t e = 0; e < dy.size(); ++e) {
    Tensor3 dxe(dy[e].rows, dy[e].cols, dy[e].channels);
    for (int c = 0; c < dy[e].channels; ++c) {
      const auto xs = x_pre[e].plane(c).array();
      const auto ds = dy[e].plane(c).array();
      dslope[c] += (xs < 0.0).select(ds * xs, 0.0).sum();
      dxe.plane(c) = (xs >= 0.0).select(ds, ds * slope[c]);
    }
    dx.push_back(std::move(dxe));
  }
  return dx;
}

MatrixXd prelu_fc_forward(const MatrixXd& x, const VectorXd& slope) {
  return x.array().max(0.0) + (x.array().min(0.0).colwise() * slope.array());
}

VectorXd prelu_fc_forward(const VectorXd& x, const VectorXd& slope) {
  return x.array().max(0.0) + slope.array() * x.array().min(0.0);
}

MatrixXd prelu_fc_backward(const MatrixXd& dy, const MatrixXd& x_pre,
                           const VectorXd& slope, VectorXd& dslope) {
  dslope += (x_pre.array() < 0.0).select(dy.array() * x_pre.array(), 0.0).rowwise().sum().matrix();
  MatrixXd dx(dy.rows(), dy.cols());
  dx = (x_pre.array() >= 0.0)
           .select(dy.array(), dy.array().colwise() * slope.array());
  return dx;
}

}  // namespace cst::net
