#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "cst/datagen.hpp"
#include "cst/heatmaps.hpp"
#include "cst/net/ops.hpp"
#include "cst/rng.hpp"
#include "cst/sha256.hpp"

namespace cst::net {

/// Linear map between a physical value range and the Tanh output range
/// [-0.9, 0.9]. The upper physical bound is min + kMaxBlobs * (max - min):
/// overlapping blobs superpose, so targets can exceed the single-blob max.
struct OutputMapping {
  double lo = 0.0, hi = 1.0;

  double to_net(double physical) const { return -0.9 + 1.8 * (physical - lo) / (hi - lo); }
  double to_physical(double net) const { return lo + (net + 0.9) * (hi - lo) / 1.8; }
};

constexpr int kMaxBlobs = 3;

/// Everything that fixes tensor shapes and the output decoding.
struct Architecture {
  int num_views = 4;        // Q
  int beams_per_view = 8;   // R
  std::vector<ConvSpec> centro_blocks;
  ConvSpec smooth_block;
  std::vector<int> decoder_widths;  // hidden stage widths; output stage is N
  int output_dim = 0;               // N
  OutputMapping conc_map, temp_map;

  int beam_count() const { return num_views * beams_per_view; }
  int centro_in_h() const { return 2 * num_views; }
  int centro_in_w() const { return beams_per_view; }
  int smooth_in_h() const;
  int smooth_in_w() const;
  int latent_dim() const;
  int stage_count() const { return static_cast<int>(decoder_widths.size()) + 1; }
  int stage_output_dim(int g) const {
    return g + 1 < stage_count() ? decoder_widths[static_cast<std::size_t>(g)] : output_dim;
  }
  int stage_input_dim(int g) const {
    return g == 0 ? latent_dim() : stage_output_dim(g - 1);
  }

  /// Canonical description digest; ensembles require equal digests.
  Sha256::Digest digest() const;

  /// Table-style architecture from the run config: 3x3 stride-1 convolution
  /// blocks (padding 1 on all but the last, 0 on the last) over the
  /// centrosymmetry plane, one (2, F) stride-(1, F) block over the
  /// smoothness planes, then the configured decoder widths.
  static Architecture from_config(const RunConfig& config, int output_dim);
};

struct ConvBlock {
  ConvSpec spec;
  MatrixXd kernel;  // kernel_rows x cout
  BnParams bn;
  VectorXd prelu_slope;
};

struct DecoderStage {
  MatrixXd w_x, w_t;  // n_out x n_in
  BnParams bn_x, bn_t;
  VectorXd cross_from_t;  // multiplies BN_t output inside the conc equation
  VectorXd cross_from_x;  // multiplies BN_x output inside the temp equation
  VectorXd prelu_x, prelu_t;  // empty on the output stage
  bool is_output = false;
};

/// All trainable tensors plus batch-norm running statistics and the
/// standardisation statistics the inputs were trained against.
struct Model {
  Architecture arch;
  std::vector<ConvBlock> centro;
  ConvBlock smooth;
  std::vector<DecoderStage> stages;
  StandardizationStats stats;
  long long step_count = 0;

  /// Fan-in-scaled normal init for kernels and weights, gamma 1, beta 0,
  /// PReLU slope 0.25, crosstalk vectors 0 (branches start decoupled).
  static Model init(const Architecture& arch, Rng& rng);
};

/// A named span over one parameter tensor of a model (or its gradients).
struct ParamRef {
  std::string name;
  double* data;
  std::ptrdiff_t size;
  bool weight_decay;  // true for kernels, weights, crosstalk vectors
};

/// Trainable parameters in a fixed order shared by Model and Gradients.
std::vector<ParamRef> param_refs(Model& model);
/// Non-trainable buffers (BN running statistics), for checkpointing.
std::vector<ParamRef> buffer_refs(Model& model);
/// Total trainable parameter count for an architecture, without allocation.
long long parameter_count(const Architecture& arch);

/// Gradient accumulator shaped exactly like the trainable parameters.
struct Gradients {
  std::vector<ConvBlock> centro;
  ConvBlock smooth;
  std::vector<DecoderStage> stages;

  static Gradients zeros_like(const Model& model);
  void set_zero();
  bool all_finite() const;
};
std::vector<ParamRef> param_refs(Gradients& grads);

/// Per-step activation caches for backward.
struct TrainContext {
  Batch3 centro_in, smooth_in;
  std::vector<ConvCache> centro_conv;
  std::vector<BnConvCache> centro_bn;
  std::vector<Batch3> centro_pre_act;
  ConvCache smooth_conv;
  BnConvCache smooth_bn;
  Batch3 smooth_pre_act;
  MatrixXd latent;                      // latent_dim x batch
  std::vector<MatrixXd> x_in, t_in;     // stage inputs
  std::vector<BnFcCache> bn_x, bn_t;
  std::vector<MatrixXd> u_x, u_t;       // shared BN outputs per stage
  std::vector<MatrixXd> pre_x, pre_t;   // pre-activations per stage
  MatrixXd out_x, out_t;                // Tanh outputs (mapped space)
};

/// Train-mode forward over a standardised input batch (columns are
/// examples). Updates BN running statistics. Outputs live in mapped space.
void forward_train(Model& model, const MatrixXd& a1, const MatrixXd& a2,
                   TrainContext& ctx);

/// Backprop from mapped-space output gradients. Accumulates parameter
/// gradients; optionally returns gradients w.r.t. the standardised inputs.
void backward(const Model& model, const TrainContext& ctx, const MatrixXd& dout_x,
              const MatrixXd& dout_t, Gradients& grads, MatrixXd* da1 = nullptr,
              MatrixXd* da2 = nullptr);

/// Deterministic single-example inference with running statistics; safe to
/// call concurrently on a const model. Outputs in mapped space.
void forward_infer(const Model& model, const Eigen::VectorXd& a1,
                   const Eigen::VectorXd& a2, Eigen::VectorXd& out_x,
                   Eigen::VectorXd& out_t);

/// Extractor-only inference, for shape audits: returns the two feature maps
/// and the concatenated latent vector.
struct ExtractorOut {
  Tensor3 centro_features;
  Tensor3 smooth_features;
  VectorXd latent;
};
ExtractorOut extractor_infer(const Model& model, const Eigen::VectorXd& a1,
                             const Eigen::VectorXd& a2);

/// Inference in physical units (inverse output mapping applied).
void reconstruct(const Model& model, const Eigen::VectorXd& a1_std,
                 const Eigen::VectorXd& a2_std, Eigen::VectorXd& conc,
                 Eigen::VectorXd& temp);

}  // namespace cst::net
