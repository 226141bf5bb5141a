#include "cst/net/model.hpp"

#include <cmath>

#include "cst/errors.hpp"

namespace cst::net {

namespace {

int least_prime_factor_local(int r) { return cst::least_prime_factor(r); }

/// Flattens (h, w, c) row-major with the channel fastest, matching the
/// documented latent layout.
void flatten_into(const Tensor3& t, double* out) {
  std::ptrdiff_t k = 0;
  for (int h = 0; h < t.rows; ++h)
    for (int w = 0; w < t.cols; ++w)
      for (int c = 0; c < t.channels; ++c) out[k++] = t.at(c, h, w);
}

void unflatten_from(const double* in, Tensor3& t) {
  std::ptrdiff_t k = 0;
  for (int h = 0; h < t.rows; ++h)
    for (int w = 0; w < t.cols; ++w)
      for (int c = 0; c < t.channels; ++c) t.at(c, h, w) = in[k++];
}

Tensor3 heatmap_centro_tensor(const HeatmapPair& maps) {
  Tensor3 t(static_cast<int>(maps.centro.rows()), static_cast<int>(maps.centro.cols()), 1);
  for (int h = 0; h < t.rows; ++h)
    for (int w = 0; w < t.cols; ++w) t.at(0, h, w) = maps.centro(h, w);
  return t;
}

Tensor3 heatmap_smooth_tensor(const HeatmapPair& maps) {
  Tensor3 t(static_cast<int>(maps.smooth_nu1.rows()),
            static_cast<int>(maps.smooth_nu1.cols()), 2);
  for (int h = 0; h < t.rows; ++h)
    for (int w = 0; w < t.cols; ++w) {
      t.at(0, h, w) = maps.smooth_nu1(h, w);
      t.at(1, h, w) = maps.smooth_nu2(h, w);
    }
  return t;
}

}  // namespace

int Architecture::smooth_in_h() const {
  return beams_per_view / least_prime_factor_local(beams_per_view);
}

int Architecture::smooth_in_w() const {
  return num_views * least_prime_factor_local(beams_per_view);
}

int Architecture::latent_dim() const {
  int h = centro_in_h(), w = centro_in_w();
  int c = 1;
  for (const ConvSpec& spec : centro_blocks) {
    h = spec.out_h(h);
    w = spec.out_w(w);
    c = spec.cout;
  }
  const int centro_len = h * w * c;
  const int smooth_len = smooth_block.out_h(smooth_in_h()) *
                         smooth_block.out_w(smooth_in_w()) * smooth_block.cout;
  return centro_len + smooth_len;
}

Sha256::Digest Architecture::digest() const {
  std::string desc;
  auto add = [&desc](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g;", v);
    desc += buf;
  };
  add(num_views);
  add(beams_per_view);
  for (const ConvSpec& s : centro_blocks) {
    add(s.kh); add(s.kw); add(s.cin); add(s.cout);
    add(s.sh); add(s.sw); add(s.ph); add(s.pw);
  }
  const ConvSpec& s = smooth_block;
  add(s.kh); add(s.kw); add(s.cin); add(s.cout);
  add(s.sh); add(s.sw); add(s.ph); add(s.pw);
  for (int w : decoder_widths) add(w);
  add(output_dim);
  add(conc_map.lo); add(conc_map.hi);
  add(temp_map.lo); add(temp_map.hi);
  return Sha256::of(desc);
}

Architecture Architecture::from_config(const RunConfig& config, int output_dim) {
  Architecture arch;
  arch.num_views = config.geom_num_views;
  arch.beams_per_view = config.geom_beams_per_view;
  arch.output_dim = output_dim;
  arch.decoder_widths = config.net_decoder_widths;

  int cin = 1;
  const int blocks = static_cast<int>(config.net_conv_filters.size());
  for (int b = 0; b < blocks; ++b) {
    ConvSpec spec;
    spec.kh = spec.kw = 3;
    spec.cin = cin;
    spec.cout = config.net_conv_filters[static_cast<std::size_t>(b)];
    spec.sh = spec.sw = 1;
    spec.ph = spec.pw = (b + 1 < blocks) ? 1 : 0;
    arch.centro_blocks.push_back(spec);
    cin = spec.cout;
  }

  const int f = least_prime_factor_local(arch.beams_per_view);
  ConvSpec smooth;
  smooth.kh = 2;
  smooth.kw = f;
  smooth.cin = 2;
  smooth.cout = config.net_smooth_filters;
  smooth.sh = 1;
  smooth.sw = f;
  smooth.ph = smooth.pw = 0;
  arch.smooth_block = smooth;

  arch.conc_map = {config.data_x_min,
                   config.data_x_min + kMaxBlobs * (config.data_x_max - config.data_x_min)};
  arch.temp_map = {config.data_t_min,
                   config.data_t_min + kMaxBlobs * (config.data_t_max - config.data_t_min)};
  return arch;
}

namespace {

ConvBlock make_conv_block(const ConvSpec& spec) {
  ConvBlock block;
  block.spec = spec;
  block.kernel = MatrixXd::Zero(spec.kernel_rows(), spec.cout);
  block.bn = BnParams(spec.cout);
  block.prelu_slope = VectorXd::Constant(spec.cout, 0.25);
  return block;
}

DecoderStage make_stage(int n_in, int n_out, bool is_output) {
  DecoderStage stage;
  stage.w_x = MatrixXd::Zero(n_out, n_in);
  stage.w_t = MatrixXd::Zero(n_out, n_in);
  stage.bn_x = BnParams(n_out);
  stage.bn_t = BnParams(n_out);
  stage.cross_from_t = VectorXd::Zero(n_out);
  stage.cross_from_x = VectorXd::Zero(n_out);
  stage.is_output = is_output;
  if (!is_output) {
    stage.prelu_x = VectorXd::Constant(n_out, 0.25);
    stage.prelu_t = VectorXd::Constant(n_out, 0.25);
  }
  return stage;
}

void fill_normal(MatrixXd& m, double stddev, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal(0.0, stddev);
}

}  // namespace

Model Model::init(const Architecture& arch, Rng& rng) {
  Model model;
  model.arch = arch;
  for (const ConvSpec& spec : arch.centro_blocks)
    model.centro.push_back(make_conv_block(spec));
  model.smooth = make_conv_block(arch.smooth_block);
  for (int g = 0; g < arch.stage_count(); ++g)
    model.stages.push_back(make_stage(arch.stage_input_dim(g), arch.stage_output_dim(g),
                                      g + 1 == arch.stage_count()));

  for (ConvBlock* block : [&] {
         std::vector<ConvBlock*> v;
         for (auto& b : model.centro) v.push_back(&b);
         v.push_back(&model.smooth);
         return v;
       }()) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(block->spec.kernel_rows()));
    fill_normal(block->kernel, stddev, rng);
  }
  for (DecoderStage& stage : model.stages) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(stage.w_x.cols()));
    fill_normal(stage.w_x, stddev, rng);
    fill_normal(stage.w_t, stddev, rng);
  }
  return model;
}

namespace {

template <typename ConvBlockT, typename StageT>
void collect_param_refs(std::vector<ConvBlockT>& centro, ConvBlockT& smooth,
                        std::vector<StageT>& stages, std::vector<ParamRef>& out) {
  auto add = [&out](const std::string& name, auto& mat, bool decay) {
    out.push_back({name, mat.data(), mat.size(), decay});
  };
  for (std::size_t b = 0; b < centro.size(); ++b) {
    const std::string p = "centro" + std::to_string(b + 1);
    add(p + ".kernel", centro[b].kernel, true);
    add(p + ".bn.gamma", centro[b].bn.gamma, false);
    add(p + ".bn.beta", centro[b].bn.beta, false);
    add(p + ".prelu", centro[b].prelu_slope, false);
  }
  add("smooth.kernel", smooth.kernel, true);
  add("smooth.bn.gamma", smooth.bn.gamma, false);
  add("smooth.bn.beta", smooth.bn.beta, false);
  add("smooth.prelu", smooth.prelu_slope, false);
  for (std::size_t g = 0; g < stages.size(); ++g) {
    const std::string p = "stage" + std::to_string(g + 1);
    add(p + ".wx", stages[g].w_x, true);
    add(p + ".wt", stages[g].w_t, true);
    add(p + ".bnx.gamma", stages[g].bn_x.gamma, false);
    add(p + ".bnx.beta", stages[g].bn_x.beta, false);
    add(p + ".bnt.gamma", stages[g].bn_t.gamma, false);
    add(p + ".bnt.beta", stages[g].bn_t.beta, false);
    add(p + ".cross_from_t", stages[g].cross_from_t, true);
    add(p + ".cross_from_x", stages[g].cross_from_x, true);
    if (!stages[g].is_output) {
      add(p + ".prelu_x", stages[g].prelu_x, false);
      add(p + ".prelu_t", stages[g].prelu_t, false);
    }
  }
}

}  // namespace

std::vector<ParamRef> param_refs(Model& model) {
  std::vector<ParamRef> refs;
  collect_param_refs(model.centro, model.smooth, model.stages, refs);
  return refs;
}

std::vector<ParamRef> param_refs(Gradients& grads) {
  std::vector<ParamRef> refs;
  collect_param_refs(grads.centro, grads.smooth, grads.stages, refs);
  return refs;
}

std::vector<ParamRef> buffer_refs(Model& model) {
  std::vector<ParamRef> refs;
  auto add = [&refs](const std::string& name, VectorXd& v) {
    refs.push_back({name, v.data(), v.size(), false});
  };
  for (std::size_t b = 0; b < model.centro.size(); ++b) {
    const std::string p = "centro" + std::to_string(b + 1);
    add(p + ".bn.running_mean", model.centro[b].bn.running_mean);
    add(p + ".bn.running_var", model.centro[b].bn.running_var);
  }
  add("smooth.bn.running_mean", model.smooth.bn.running_mean);
  add("smooth.bn.running_var", model.smooth.bn.running_var);
  for (std::size_t g = 0; g < model.stages.size(); ++g) {
    const std::string p = "stage" + std::to_string(g + 1);
    add(p + ".bnx.running_mean", model.stages[g].bn_x.running_mean);
    add(p + ".bnx.running_var", model.stages[g].bn_x.running_var);
    add(p + ".bnt.running_mean", model.stages[g].bn_t.running_mean);
    add(p + ".bnt.running_var", model.stages[g].bn_t.running_var);
  }
  return refs;
}

long long parameter_count(const Architecture& arch) {
  long long count = 0;
  for (const ConvSpec& spec : arch.centro_blocks)
    count += spec.kernel_rows() * spec.cout + 3LL * spec.cout;
  count += arch.smooth_block.kernel_rows() * arch.smooth_block.cout +
           3LL * arch.smooth_block.cout;
  for (int g = 0; g < arch.stage_count(); ++g) {
    const long long n_in = arch.stage_input_dim(g);
    const long long n_out = arch.stage_output_dim(g);
    count += 2 * n_in * n_out;                 // w_x, w_t
    count += 4 * n_out;                        // gamma/beta both branches
    count += 2 * n_out;                        // crosstalk vectors
    if (g + 1 < arch.stage_count()) count += 2 * n_out;  // PReLU slopes
  }
  return count;
}

Gradients Gradients::zeros_like(const Model& model) {
  Gradients grads;
  for (const ConvBlock& block : model.centro) grads.centro.push_back(make_conv_block(block.spec));
  grads.smooth = make_conv_block(model.smooth.spec);
  for (const DecoderStage& stage : model.stages)
    grads.stages.push_back(make_stage(static_cast<int>(stage.w_x.cols()),
                                      static_cast<int>(stage.w_x.rows()), stage.is_output));
  grads.set_zero();
  return grads;
}

void Gradients::set_zero() {
  for (ParamRef& ref : param_refs(*this))
    Eigen::Map<VectorXd>(ref.data, ref.size).setZero();
}

bool Gradients::all_finite() const {
  auto& self = const_cast<Gradients&>(*this);
  for (ParamRef& ref : param_refs(self)) {
    const Eigen::Map<const VectorXd> v(ref.data, ref.size);
    if (!v.allFinite()) return false;
  }
  return true;
}

namespace {

void lambda_layer(const Architecture& arch, const MatrixXd& a1, const MatrixXd& a2,
                  Batch3& centro_in, Batch3& smooth_in) {
  const auto batch = a1.cols();
  centro_in.clear();
  smooth_in.clear();
  centro_in.reserve(static_cast<std::size_t>(batch));
  smooth_in.reserve(static_cast<std::size_t>(batch));
  for (Eigen::Index e = 0; e < batch; ++e) {
    const HeatmapPair maps =
        build_heatmaps(a1.col(e), a2.col(e), arch.num_views, arch.beams_per_view);
    centro_in.push_back(heatmap_centro_tensor(maps));
    smooth_in.push_back(heatmap_smooth_tensor(maps));
  }
}

}  // namespace

void forward_train(Model& model, const MatrixXd& a1, const MatrixXd& a2,
                   TrainContext& ctx) {
  const Architecture& arch = model.arch;
  if (a1.rows() != arch.beam_count() || a2.rows() != arch.beam_count())
    throw CompatError("projection length does not match the architecture");
  const auto batch = a1.cols();
  if (batch < 2) throw NumericError("training forward pass needs batch >= 2");

  lambda_layer(arch, a1, a2, ctx.centro_in, ctx.smooth_in);

  const std::size_t blocks = model.centro.size();
  ctx.centro_conv.assign(blocks, {});
  ctx.centro_bn.assign(blocks, {});
  ctx.centro_pre_act.assign(blocks, {});
  Batch3 cur = ctx.centro_in;
  for (std::size_t b = 0; b < blocks; ++b) {
    Batch3 conv_out = conv2d_forward(cur, model.centro[b].kernel, model.centro[b].spec,
                                     &ctx.centro_conv[b]);
    ctx.centro_pre_act[b] =
        batchnorm_conv_train(conv_out, model.centro[b].bn, ctx.centro_bn[b]);
    cur = prelu_conv_forward(ctx.centro_pre_act[b], model.centro[b].prelu_slope);
  }
  const Batch3 centro_out = std::move(cur);

  Batch3 smooth_conv =
      conv2d_forward(ctx.smooth_in, model.smooth.kernel, model.smooth.spec, &ctx.smooth_conv);
  ctx.smooth_pre_act = batchnorm_conv_train(smooth_conv, model.smooth.bn, ctx.smooth_bn);
  const Batch3 smooth_out = prelu_conv_forward(ctx.smooth_pre_act, model.smooth.prelu_slope);

  const std::ptrdiff_t centro_len = centro_out.front().data.size();
  const std::ptrdiff_t smooth_len = smooth_out.front().data.size();
  ctx.latent.resize(centro_len + smooth_len, batch);
  for (Eigen::Index e = 0; e < batch; ++e) {
    flatten_into(centro_out[static_cast<std::size_t>(e)], ctx.latent.col(e).data());
    flatten_into(smooth_out[static_cast<std::size_t>(e)],
                 ctx.latent.col(e).data() + centro_len);
  }

  const int stages = arch.stage_count();
  ctx.x_in.assign(static_cast<std::size_t>(stages), {});
  ctx.t_in.assign(static_cast<std::size_t>(stages), {});
  ctx.bn_x.assign(static_cast<std::size_t>(stages), {});
  ctx.bn_t.assign(static_cast<std::size_t>(stages), {});
  ctx.u_x.assign(static_cast<std::size_t>(stages), {});
  ctx.u_t.assign(static_cast<std::size_t>(stages), {});
  ctx.pre_x.assign(static_cast<std::size_t>(stages), {});
  ctx.pre_t.assign(static_cast<std::size_t>(stages), {});

  MatrixXd x_prev = ctx.latent;
  MatrixXd t_prev = ctx.latent;
  for (int g = 0; g < stages; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    DecoderStage& stage = model.stages[gi];
    ctx.x_in[gi] = x_prev;
    ctx.t_in[gi] = t_prev;
    const MatrixXd lin_x = stage.w_x * x_prev;
    const MatrixXd lin_t = stage.w_t * t_prev;
    ctx.u_x[gi] = batchnorm_fc_train(lin_x, stage.bn_x, ctx.bn_x[gi]);
    ctx.u_t[gi] = batchnorm_fc_train(lin_t, stage.bn_t, ctx.bn_t[gi]);
    ctx.pre_x[gi] =
        ctx.u_x[gi] + (ctx.u_t[gi].array().colwise() * stage.cross_from_t.array()).matrix();
    ctx.pre_t[gi] =
        ctx.u_t[gi] + (ctx.u_x[gi].array().colwise() * stage.cross_from_x.array()).matrix();
    if (stage.is_output) {
      ctx.out_x = ctx.pre_x[gi].array().tanh();
      ctx.out_t = ctx.pre_t[gi].array().tanh();
    } else {
      x_prev = prelu_fc_forward(ctx.pre_x[gi], stage.prelu_x);
      t_prev = prelu_fc_forward(ctx.pre_t[gi], stage.prelu_t);
    }
  }
}

void backward(const Model& model, const TrainContext& ctx, const MatrixXd& dout_x,
              const MatrixXd& dout_t, Gradients& grads, MatrixXd* da1, MatrixXd* da2) {
  const Architecture& arch = model.arch;
  const int stages = arch.stage_count();

  MatrixXd dx_next, dt_next;
  for (int g = stages - 1; g >= 0; --g) {
    const auto gi = static_cast<std::size_t>(g);
    const DecoderStage& stage = model.stages[gi];
    DecoderStage& gstage = grads.stages[gi];

    MatrixXd dpre_x, dpre_t;
    if (stage.is_output) {
      dpre_x = dout_x.array() * (1.0 - ctx.out_x.array().square());
      dpre_t = dout_t.array() * (1.0 - ctx.out_t.array().square());
    } else {
      dpre_x = prelu_fc_backward(dx_next, ctx.pre_x[gi], stage.prelu_x, gstage.prelu_x);
      dpre_t = prelu_fc_backward(dt_next, ctx.pre_t[gi], stage.prelu_t, gstage.prelu_t);
    }

    gstage.cross_from_t += (dpre_x.array() * ctx.u_t[gi].array()).rowwise().sum().matrix();
    gstage.cross_from_x += (dpre_t.array() * ctx.u_x[gi].array()).rowwise().sum().matrix();

    const MatrixXd du_x =
        dpre_x + (dpre_t.array().colwise() * stage.cross_from_x.array()).matrix();
    const MatrixXd du_t =
        dpre_t + (dpre_x.array().colwise() * stage.cross_from_t.array()).matrix();

    const MatrixXd dlin_x = batchnorm_fc_backward(du_x, stage.bn_x, ctx.bn_x[gi],
                                                  gstage.bn_x.gamma, gstage.bn_x.beta);
    const MatrixXd dlin_t = batchnorm_fc_backward(du_t, stage.bn_t, ctx.bn_t[gi],
                                                  gstage.bn_t.gamma, gstage.bn_t.beta);

    gstage.w_x.noalias() += dlin_x * ctx.x_in[gi].transpose();
    gstage.w_t.noalias() += dlin_t * ctx.t_in[gi].transpose();
    dx_next = stage.w_x.transpose() * dlin_x;
    dt_next = stage.w_t.transpose() * dlin_t;
  }
  const MatrixXd dlatent = dx_next + dt_next;

  // Split the latent gradient back into the two feature maps.
  const auto batch = dlatent.cols();
  const std::size_t blocks = model.centro.size();
  int ch = arch.centro_in_h(), cw = arch.centro_in_w();
  for (const ConvSpec& spec : arch.centro_blocks) {
    ch = spec.out_h(ch);
    cw = spec.out_w(cw);
  }
  const int cc = arch.centro_blocks.back().cout;
  const std::ptrdiff_t centro_len = std::ptrdiff_t(ch) * cw * cc;
  const int sh = arch.smooth_block.out_h(arch.smooth_in_h());
  const int sw = arch.smooth_block.out_w(arch.smooth_in_w());

  Batch3 dcentro, dsmooth;
  dcentro.reserve(static_cast<std::size_t>(batch));
  dsmooth.reserve(static_cast<std::size_t>(batch));
  for (Eigen::Index e = 0; e < batch; ++e) {
    Tensor3 dce(ch, cw, cc);
    unflatten_from(dlatent.col(e).data(), dce);
    dcentro.push_back(std::move(dce));
    Tensor3 dse(sh, sw, arch.smooth_block.cout);
    unflatten_from(dlatent.col(e).data() + centro_len, dse);
    dsmooth.push_back(std::move(dse));
  }

  Batch3 dcur = std::move(dcentro);
  for (std::size_t b = blocks; b-- > 0;) {
    Batch3 dpre = prelu_conv_backward(dcur, ctx.centro_pre_act[b],
                                      model.centro[b].prelu_slope, grads.centro[b].prelu_slope);
    Batch3 dconv = batchnorm_conv_backward(dpre, model.centro[b].bn, ctx.centro_bn[b],
                                           grads.centro[b].bn.gamma, grads.centro[b].bn.beta);
    dcur = conv2d_backward(dconv, model.centro[b].kernel, model.centro[b].spec,
                           ctx.centro_conv[b], grads.centro[b].kernel);
  }
  const Batch3 dcentro_in = std::move(dcur);

  Batch3 dsmooth_pre = prelu_conv_backward(dsmooth, ctx.smooth_pre_act,
                                           model.smooth.prelu_slope, grads.smooth.prelu_slope);
  Batch3 dsmooth_conv = batchnorm_conv_backward(dsmooth_pre, model.smooth.bn, ctx.smooth_bn,
                                                grads.smooth.bn.gamma, grads.smooth.bn.beta);
  const Batch3 dsmooth_in = conv2d_backward(dsmooth_conv, model.smooth.kernel,
                                            model.smooth.spec, ctx.smooth_conv,
                                            grads.smooth.kernel);

  if (da1 && da2) {
    // Invert the Lambda rearrangement: every heatmap cell is one input entry,
    // and the smoothness planes duplicate them, so gradients add.
    const int Q = arch.num_views, R = arch.beams_per_view;
    const int F = least_prime_factor_local(R);
    da1->setZero(arch.beam_count(), batch);
    da2->setZero(arch.beam_count(), batch);
    for (Eigen::Index e = 0; e < batch; ++e) {
      const Tensor3& dce = dcentro_in[static_cast<std::size_t>(e)];
      const Tensor3& dse = dsmooth_in[static_cast<std::size_t>(e)];
      for (int q = 0; q < Q; ++q)
        for (int r = 0; r < R; ++r) {
          (*da1)(q * R + r, e) += dce.at(0, q, r);
          (*da2)((Q - 1 - q) * R + r, e) += dce.at(0, Q + q, r);
        }
      for (int j = 0; j < Q; ++j)
        for (int u = 0; u < R / F; ++u)
          for (int v = 0; v < F; ++v) {
            (*da1)(j * R + u * F + v, e) += dse.at(0, u, F * j + v);
            (*da2)(j * R + u * F + v, e) += dse.at(1, u, F * j + v);
          }
    }
  }
}

namespace {

Tensor3 conv_block_infer(const Tensor3& x, const ConvBlock& block) {
  Tensor3 out = conv2d_forward(x, block.kernel, block.spec);
  out = batchnorm_conv_infer(out, block.bn);
  for (int c = 0; c < out.channels; ++c)
    out.plane(c) = out.plane(c).array().max(0.0) +
                   block.prelu_slope[c] * out.plane(c).array().min(0.0);
  return out;
}

}  // namespace

ExtractorOut extractor_infer(const Model& model, const Eigen::VectorXd& a1,
                             const Eigen::VectorXd& a2) {
  const Architecture& arch = model.arch;
  const HeatmapPair maps = build_heatmaps(a1, a2, arch.num_views, arch.beams_per_view);
  ExtractorOut out;
  Tensor3 cur = heatmap_centro_tensor(maps);
  for (const ConvBlock& block : model.centro) cur = conv_block_infer(cur, block);
  out.centro_features = std::move(cur);
  out.smooth_features = conv_block_infer(heatmap_smooth_tensor(maps), model.smooth);
  out.latent.resize(out.centro_features.data.size() + out.smooth_features.data.size());
  flatten_into(out.centro_features, out.latent.data());
  flatten_into(out.smooth_features, out.latent.data() + out.centro_features.data.size());
  return out;
}

void forward_infer(const Model& model, const Eigen::VectorXd& a1,
                   const Eigen::VectorXd& a2, Eigen::VectorXd& out_x,
                   Eigen::VectorXd& out_t) {
  const ExtractorOut extracted = extractor_infer(model, a1, a2);
  VectorXd x_prev = extracted.latent;
  VectorXd t_prev = extracted.latent;
  for (const DecoderStage& stage : model.stages) {
    const VectorXd u_x = batchnorm_fc_infer(stage.w_x * x_prev, stage.bn_x);
    const VectorXd u_t = batchnorm_fc_infer(stage.w_t * t_prev, stage.bn_t);
    const VectorXd pre_x = u_x.array() + stage.cross_from_t.array() * u_t.array();
    const VectorXd pre_t = u_t.array() + stage.cross_from_x.array() * u_x.array();
    if (stage.is_output) {
      out_x = pre_x.array().tanh();
      out_t = pre_t.array().tanh();
    } else {
      x_prev = prelu_fc_forward(pre_x, stage.prelu_x);
      t_prev = prelu_fc_forward(pre_t, stage.prelu_t);
    }
  }
}

void reconstruct(const Model& model, const Eigen::VectorXd& a1_std,
                 const Eigen::VectorXd& a2_std, Eigen::VectorXd& conc,
                 Eigen::VectorXd& temp) {
  VectorXd out_x, out_t;
  forward_infer(model, a1_std, a2_std, out_x, out_t);
  conc = out_x.unaryExpr([&](double v) { return model.arch.conc_map.to_physical(v); });
  temp = out_t.unaryExpr([&](double v) { return model.arch.temp_map.to_physical(v); });
}

}  // namespace cst::net
