// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <utility>

#include "shufflepose/autograd.hpp"

namespace shufflepose::network {

namespace {

void maybe_record(std::vector<Tensor> tensors, std::function<void()> adjoint) {
  if (Tape* tape = Tape::active()) {
    tape->record(std::move(tensors), std::move(adjoint));
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (base_channels < 4 || base_channels % 4 != 0) {
    throw ConfigError("base_channels must be a positive multiple of 4, got " +
                      std::to_string(base_channels));
  }
  if (blocks_per_stage < 1) {
    throw ConfigError("blocks_per_stage must be >= 1, got " + std::to_string(blocks_per_stage));
  }
  if (num_keypoints < 1) {
    throw ConfigError("num_keypoints must be >= 1, got " + std::to_string(num_keypoints));
  }
  if (ohkm_k < 1 || ohkm_k > num_keypoints) {
    throw ConfigError("ohkm_k must lie in [1, num_keypoints], got " + std::to_string(ohkm_k));
  }
  if (input_h <= 0 || input_w <= 0 || input_h % 32 != 0 || input_w % 32 != 0) {
    throw ConfigError("input_h and input_w must be positive multiples of 32, got " +
                      std::to_string(input_h) + "x" + std::to_string(input_w));
  }
  if (input_h * 3 != input_w * 4) {
    throw ConfigError("input_h:input_w must be 4:3, got " + std::to_string(input_h) + "x" +
                      std::to_string(input_w));
  }
  if (groups < 1 || (4 * base_channels) % groups != 0) {
    throw ConfigError("groups must divide the concatenated width " +
                      std::to_string(4 * base_channels) + ", got " + std::to_string(groups));
  }
}

Tensor keypoint_mse_loss(const Tensor& pred, const Tensor& target,
                         const Visibility& vis, Index k, Index* skipped) {
  const Dims& d = pred.dims();
  if (target.dims() != d) {
    throw ShapeError("keypoint_mse_loss: prediction " + to_string(d) + " vs target " +
                     to_string(target.dims()));
  }
  if (static_cast<Index>(vis.size()) != d.n) {
    throw ShapeError("keypoint_mse_loss: visibility covers " + std::to_string(vis.size()) +
                     " samples, batch has " + std::to_string(d.n));
  }
  for (const auto& row : vis) {
    if (static_cast<Index>(row.size()) != d.c) {
      throw ShapeError("keypoint_mse_loss: visibility row length " +
                       std::to_string(row.size()) + " vs " + std::to_string(d.c) +
                       " keypoint channels");
    }
  }
  if (k < 1 || k > d.c) {
    throw ShapeError("keypoint_mse_loss: k must lie in [1, " + std::to_string(d.c) +
                     "], got " + std::to_string(k));
  }

  const Index plane = d.h * d.w;
  using CMap = Eigen::Map<const Eigen::ArrayXd>;

  // selected[n] holds the keypoint indices whose errors enter sample n's
  // average; the adjoint only touches those channels.
  std::vector<std::vector<Index>> selected(static_cast<std::size_t>(d.n));
  Scalar batch_acc = 0.0;
  Index skip = 0;
  for (Index n = 0; n < d.n; ++n) {
    std::vector<std::pair<Scalar, Index>> per;
    per.reserve(static_cast<std::size_t>(d.c));
    for (Index j = 0; j < d.c; ++j) {
      if (vis[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)] <= 0) continue;
      CMap p(pred.data() + pred.offset(n, j, 0, 0), plane);
      CMap t(target.data() + target.offset(n, j, 0, 0), plane);
      const Scalar mse = (p - t).matrix().squaredNorm() / static_cast<Scalar>(plane);
      per.emplace_back(mse, j);
    }
    if (per.empty()) {
      ++skip;
      continue;
    }
    std::stable_sort(per.begin(), per.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const Index m = std::min<Index>(k, static_cast<Index>(per.size()));
    Scalar s = 0.0;
    auto& sel = selected[static_cast<std::size_t>(n)];
    sel.reserve(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
      s += per[static_cast<std::size_t>(i)].first;
      sel.push_back(per[static_cast<std::size_t>(i)].second);
    }
    batch_acc += s / static_cast<Scalar>(m);
  }
  if (skipped) *skipped += skip;

  Tensor out(1, 1, 1, 1);
  out.data()[0] = batch_acc / static_cast<Scalar>(d.n);

  maybe_record({pred, target, out}, [=]() mutable {
    const Dims& dd = pred.dims();
    const Index pl = dd.h * dd.w;
    const Scalar g = out.grad()[0];
    for (Index n = 0; n < dd.n; ++n) {
      const auto& sel = selected[static_cast<std::size_t>(n)];
      if (sel.empty()) continue;
      const Scalar coef = g * 2.0 /
          (static_cast<Scalar>(pl) * static_cast<Scalar>(sel.size()) * static_cast<Scalar>(dd.n));
      for (Index j : sel) {
        CMap p(pred.data() + pred.offset(n, j, 0, 0), pl);
        CMap t(target.data() + target.offset(n, j, 0, 0), pl);
        Eigen::Map<Eigen::ArrayXd>(pred.grad() + pred.offset(n, j, 0, 0), pl) +=
            coef * (p - t);
        Eigen::Map<Eigen::ArrayXd>(target.grad() + target.offset(n, j, 0, 0), pl) -=
            coef * (p - t);
      }
    }
  });
  return out;
}

Tensor l2_loss(const Tensor& pred, const Tensor& target, const Visibility& vis,
               Index* skipped) {
  return keypoint_mse_loss(pred, target, vis, pred.dims().c, skipped);
}

Tensor ohkm_loss(const Tensor& pred, const Tensor& target, const Visibility& vis,
                 Index k, Index* skipped) {
  return keypoint_mse_loss(pred, target, vis, k, skipped);
}

Tensor& Model::register_param(const std::string& name, const Tensor& t) {
  auto [it, inserted] = params_.emplace(name, t);
  if (!inserted) {
    throw Error("duplicate parameter name '" + name + "'");
  }
  names_.push_back(name);
  return it->second;
}

void Model::reg_conv(const std::string& prefix, layers::ConvParams& p) {
  register_param(prefix + ".weight", p.weight);
  register_param(prefix + ".bias", p.bias);
}

void Model::reg_fc(const std::string& prefix, layers::FcParams& p) {
  register_param(prefix + ".weight", p.weight);
  register_param(prefix + ".bias", p.bias);
}

void Model::reg_bottleneck(const std::string& prefix, layers::BottleneckParams& p) {
  reg_conv(prefix + ".reduce", p.reduce);
  reg_conv(prefix + ".mid", p.mid);
  reg_conv(prefix + ".expand", p.expand);
  if (p.proj) reg_conv(prefix + ".proj", *p.proj);
}

void Model::reg_block(const std::string& prefix, attention::BlockParams& p) {
  reg_bottleneck(prefix + ".bneck", p.bottleneck);
  reg_conv(prefix + ".sattn.conv", p.spatial.conv);
  reg_fc(prefix + ".cattn.fc1", p.channel.fc1);
  reg_fc(prefix + ".cattn.fc2", p.channel.fc2);
}

void Model::init_parameters(std::uint64_t seed) {
  // Every weight draws from its own generator seeded by (model seed, name),
  // so identical names initialize identically regardless of which other
  // parts of the network exist. Biases stay zero.
  for (const std::string& name : names_) {
    if (name.size() >= 7 && name.compare(name.size() - 7, 7, ".weight") == 0) {
      Rng rng(fnv1a(name.data(), name.size()) ^ (seed * 0x9E3779B97F4A7C15ULL));
      layers::kaiming_init(params_.at(name), rng);
    }
  }
}

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  const Index D = cfg_.base_channels;
  const Index K = cfg_.num_keypoints;
  Rng boot(seed);  // placeholder draws; init_parameters overwrites weights

  stem_ = layers::make_conv(D, 3, 3, 3, 2, 1, boot);
  reg_conv("stem", stem_);

  for (int i = 0; i < 4; ++i) {
    const std::string lvl = std::to_string(i + 2);
    const Index c_out = D << i;
    const Index c_in = i == 0 ? D : (D << (i - 1));
    BackboneStage& st = stages_[static_cast<std::size_t>(i)];
    st.trans = layers::make_conv(c_out, c_in, 3, 3, 2, 1, boot);
    reg_conv("backbone.s" + lvl + ".trans", st.trans);
    for (Index b = 0; b < cfg_.blocks_per_stage; ++b) {
      st.blocks.push_back(layers::make_bottleneck(c_out, c_out, boot));
      reg_bottleneck("backbone.s" + lvl + ".b" + std::to_string(b), st.blocks.back());
    }
    st.out = layers::make_reduce(c_out, D, boot);
    reg_conv("backbone.s" + lvl + ".out", st.out);
  }

  if (cfg_.use_csm) {
    csm_ = csm::make_csm(D, boot);
    for (int i = 0; i < 4; ++i) {
      reg_conv("csm.fuse" + std::to_string(i + 2), csm_.fuse[static_cast<std::size_t>(i)]);
    }
    if (cfg_.csm_reduce) {
      for (int i = 0; i < 4; ++i) {
        csm_out_[static_cast<std::size_t>(i)] = layers::make_reduce(2 * D, D, boot);
        reg_conv("csm.out" + std::to_string(i + 2), csm_out_[static_cast<std::size_t>(i)]);
      }
    }
  }

  const Index W = fpn_width();
  for (int i = 0; i < 4; ++i) {
    global_heads_[static_cast<std::size_t>(i)] = layers::make_head(W, D, K, boot);
    const std::string prefix = "global.head" + std::to_string(i + 2);
    reg_conv(prefix + ".conv3", global_heads_[static_cast<std::size_t>(i)].conv3);
    reg_conv(prefix + ".conv1", global_heads_[static_cast<std::size_t>(i)].conv1);
  }

  // Level l carries l-2 refinement blocks: deeper levels, whose features
  // travel furthest from the coarse stage, get more processing.
  for (int i = 0; i < 4; ++i) {
    for (int b = 0; b < i; ++b) {
      refine_blocks_[static_cast<std::size_t>(i)].push_back(attention::make_block(W, W, boot));
      reg_block("refine.l" + std::to_string(i + 2) + ".b" + std::to_string(b),
                refine_blocks_[static_cast<std::size_t>(i)].back());
    }
  }
  refine_final_ = attention::make_block(4 * W, W, boot);
  reg_block("refine.final", refine_final_);
  refine_head_ = layers::make_head(W, D, K, boot);
  reg_conv("refine.head.conv3", refine_head_.conv3);
  reg_conv("refine.head.conv1", refine_head_.conv1);

  init_parameters(seed);
}

Tensor& Model::parameter(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& Model::parameter(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter '" + name + "'");
  return it->second;
}

Index Model::parameter_count() const {
  Index total = 0;
  for (const auto& [name, t] : params_) total += t.numel();
  return total;
}

void Model::zero_grads() {
  for (auto& [name, t] : params_) t.zero_grad();
}

Index Model::fpn_width() const {
  return (cfg_.use_csm && !cfg_.csm_reduce) ? 2 * cfg_.base_channels : cfg_.base_channels;
}

csm::PyramidFeatures Model::backbone(const Tensor& image) const {
  const Dims& d = image.dims();
  if (d.c != 3 || d.h != cfg_.input_h || d.w != cfg_.input_w) {
    throw ShapeError("backbone: expected (n, 3, " + std::to_string(cfg_.input_h) + ", " +
                     std::to_string(cfg_.input_w) + ") input, got " + to_string(d));
  }
  Tensor x = ops::relu(layers::apply(stem_, image));
  csm::PyramidFeatures p;
  for (std::size_t i = 0; i < 4; ++i) {
    const BackboneStage& st = stages_[i];
    x = ops::relu(layers::apply(st.trans, x));
    for (const auto& blk : st.blocks) {
      x = layers::residual_bottleneck(x, blk);
    }
    p.levels[i] = layers::reduce_1x1(x, st.out);
  }
  return p;
}

csm::PyramidFeatures Model::enhance(const csm::PyramidFeatures& p) const {
  if (!cfg_.use_csm) return p;
  csm::PyramidFeatures q =
      csm::csm_forward(p, {cfg_.groups, 4 * cfg_.base_channels}, csm_);
  if (cfg_.csm_reduce) {
    for (std::size_t i = 0; i < 4; ++i) {
      q.levels[i] = layers::reduce_1x1(q.levels[i], csm_out_[i]);
    }
  }
  return q;
}

Model::GlobalOut Model::globalnet(const csm::PyramidFeatures& p) const {
  csm::validate_pyramid(p);
  GlobalOut o;
  o.features[3] = p.levels[3];
  for (int i = 2; i >= 0; --i) {
    o.features[static_cast<std::size_t>(i)] =
        ops::add(ops::upsample_nearest(o.features[static_cast<std::size_t>(i) + 1], 2),
                 p.levels[static_cast<std::size_t>(i)]);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    Tensor hm = layers::head(o.features[i], global_heads_[i]);
    o.heatmaps[i] = i == 0 ? hm : ops::upsample_nearest(hm, 1 << i);
  }
  return o;
}

Tensor Model::refinenet(const std::array<Tensor, 4>& features) const {
  std::vector<Tensor> lifted;
  lifted.reserve(4);
  for (std::size_t i = 0; i < 4; ++i) {
    Tensor r = features[i];
    for (const auto& blk : refine_blocks_[i]) {
      r = attention::block_forward(r, blk, cfg_.variant);
    }
    lifted.push_back(i == 0 ? r : ops::upsample_nearest(r, 1 << i));
  }
  Tensor fused = attention::block_forward(ops::concat_channels(lifted), refine_final_,
                                          cfg_.variant);
  return layers::head(fused, refine_head_);
}

Model::ForwardOut Model::forward(const Tensor& image) const {
  GlobalOut g = globalnet(enhance(backbone(image)));
  ForwardOut o;
  o.global_heatmaps = g.heatmaps;
  o.refine_heatmap = refinenet(g.features);
  return o;
}

Tensor Model::infer(const Tensor& image) const {
  return forward(image).refine_heatmap;
}

Model::LossOut Model::forward_loss(const Tensor& images, const Tensor& targets,
                                   const Visibility& vis) const {
  ForwardOut o = forward(images);
  LossOut lo;
  Index skipped = 0;
  std::array<Tensor, 4> l2s;
  for (std::size_t i = 0; i < 4; ++i) {
    l2s[i] = l2_loss(o.global_heatmaps[i], targets, vis, i == 0 ? &skipped : nullptr);
    lo.report.global_l2[i] = l2s[i].value();
  }
  Tensor global_mean = ops::scale(ops::add(ops::add(l2s[0], l2s[1]), ops::add(l2s[2], l2s[3])), 0.25);
  Tensor refine = ohkm_loss(o.refine_heatmap, targets, vis, cfg_.ohkm_k, nullptr);
  lo.report.refine_ohkm = refine.value();
  lo.total = ops::add(global_mean, refine);
  lo.report.total = lo.total.value();
  lo.report.skipped_samples = skipped;
  return lo;
}

}  // namespace shufflepose::network
