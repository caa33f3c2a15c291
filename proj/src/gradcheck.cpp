// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "shufflepose/attention.hpp"
#include "shufflepose/codec.hpp"
#include "shufflepose/csm.hpp"
#include "shufflepose/network.hpp"
#include "shufflepose/ops.hpp"

namespace shufflepose::gradcheck {

namespace {

Scalar eval(const std::function<Tensor()>& forward) {
  return forward().value();
}

// Global coordinate -> (tensor index, element index) over the wrt list.
struct Coord {
  std::size_t tensor;
  Index elem;
};

std::vector<Coord> pick_coords(const std::vector<Tensor>& wrt, const CheckOptions& opts) {
  Index total = 0;
  for (const Tensor& t : wrt) total += t.numel();
  std::vector<Coord> coords;
  if (opts.max_coords <= 0 || opts.max_coords >= total) {
    for (std::size_t ti = 0; ti < wrt.size(); ++ti) {
      for (Index e = 0; e < wrt[ti].numel(); ++e) coords.push_back({ti, e});
    }
    return coords;
  }
  Rng rng(opts.coord_seed * 0x9E3779B97F4A7C15ULL + 0x7F4A7C15ULL);
  std::unordered_set<Index> seen;
  while (static_cast<Index>(coords.size()) < opts.max_coords) {
    const Index g = static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(total));
    if (!seen.insert(g).second) continue;
    Index rest = g;
    for (std::size_t ti = 0; ti < wrt.size(); ++ti) {
      if (rest < wrt[ti].numel()) {
        coords.push_back({ti, rest});
        break;
      }
      rest -= wrt[ti].numel();
    }
  }
  return coords;
}

}  // namespace

Scalar max_relative_error(const std::function<Tensor()>& forward,
                          const std::vector<Tensor>& wrt,
                          const CheckOptions& opts, Index* coords_out) {
  std::vector<Eigen::ArrayXd> analytic;
  {
    Tape tape;
    Tensor loss = forward();
    tape.backward(loss);
    analytic.reserve(wrt.size());
    for (const Tensor& t : wrt) {
      analytic.push_back(t.has_grad() ? Eigen::ArrayXd(t.grad_array())
                                      : Eigen::ArrayXd(Eigen::ArrayXd::Zero(t.numel())));
    }
  }

  const std::vector<Coord> coords = pick_coords(wrt, opts);
  Scalar worst = 0.0;
  for (const Coord& c : coords) {
    Scalar* slot = wrt[c.tensor].data() + c.elem;
    const Scalar orig = *slot;
    *slot = orig + opts.step;
    const Scalar above = eval(forward);
    *slot = orig - opts.step;
    const Scalar below = eval(forward);
    *slot = orig;
    const Scalar numeric = (above - below) / (2.0 * opts.step);
    const Scalar ana = analytic[c.tensor][c.elem];
    const Scalar diff = std::abs(ana - numeric);
    if (diff > opts.abs_floor) {
      worst = std::max(worst, diff / std::max(std::abs(ana), std::abs(numeric)));
    }
  }
  if (coords_out) *coords_out = static_cast<Index>(coords.size());
  return worst;
}

CheckResult check(const std::string& name, const std::function<Tensor()>& forward,
                  const std::vector<Tensor>& wrt, const CheckOptions& opts) {
  CheckResult r;
  r.name = name;
  r.max_rel_err = max_relative_error(forward, wrt, opts, &r.coords_checked);
  r.pass = r.max_rel_err <= opts.rel_tol;
  return r;
}

namespace {

Tensor rand_tensor(Index n, Index c, Index h, Index w, Rng& rng, Scalar lo = -1.0,
                   Scalar hi = 1.0) {
  Tensor t(n, c, h, w);
  for (Index i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from zero so relu kinks stay clear of the finite
// difference step.
Tensor rand_tensor_offzero(Index n, Index c, Index h, Index w, Rng& rng) {
  Tensor t(n, c, h, w);
  for (Index i = 0; i < t.numel(); ++i) {
    const Scalar mag = rng.uniform(0.1, 1.0);
    t.data()[i] = rng.uniform() < 0.5 ? -mag : mag;
  }
  return t;
}

// sum(sigmoid(x)): a curved scalar readout that exposes wrong adjoints that
// a plain sum would mask (sum alone is linear in upstream values).
Tensor readout(const Tensor& x) {
  return ops::sum(ops::sigmoid(x));
}

}  // namespace

std::vector<CheckResult> run_suite(std::uint64_t seed) {
  std::vector<CheckResult> results;
  Rng rng(seed);

  {  // conv2d, 3x3 kernel with padding
    Tensor x = rand_tensor(2, 2, 5, 4, rng);
    Tensor w = rand_tensor(3, 2, 3, 3, rng);
    Tensor b = rand_tensor(1, 3, 1, 1, rng);
    results.push_back(check("conv2d_3x3_pad1",
                            [=] { return readout(ops::conv2d(x, w, b, 1, 1)); }, {x, w, b}));
  }
  {  // conv2d, stride 2
    Tensor x = rand_tensor(1, 3, 6, 6, rng);
    Tensor w = rand_tensor(2, 3, 3, 3, rng);
    Tensor b = rand_tensor(1, 2, 1, 1, rng);
    results.push_back(check("conv2d_3x3_stride2",
                            [=] { return readout(ops::conv2d(x, w, b, 2, 1)); }, {x, w, b}));
  }
  {  // conv2d, 1x1 kernel
    Tensor x = rand_tensor(2, 4, 3, 3, rng);
    Tensor w = rand_tensor(3, 4, 1, 1, rng);
    Tensor b = rand_tensor(1, 3, 1, 1, rng);
    results.push_back(check("conv2d_1x1",
                            [=] { return readout(ops::conv2d(x, w, b, 1, 0)); }, {x, w, b}));
  }
  {
    Tensor x = rand_tensor(3, 5, 1, 1, rng);
    Tensor w = rand_tensor(5, 5, 1, 1, rng);
    Tensor b = rand_tensor(1, 5, 1, 1, rng);
    results.push_back(check("fully_connected",
                            [=] { return readout(ops::fully_connected(x, w, b)); }, {x, w, b}));
  }
  {
    Tensor x = rand_tensor_offzero(2, 3, 4, 4, rng);
    results.push_back(check("relu", [=] { return readout(ops::relu(x)); }, {x}));
  }
  {
    Tensor x = rand_tensor(2, 3, 4, 4, rng);
    results.push_back(check("sigmoid",
                            [=] { return ops::sum(ops::mul(ops::sigmoid(x), x)); }, {x}));
  }
  {
    Tensor x = rand_tensor(2, 3, 4, 4, rng);
    results.push_back(check("global_avg_pool",
                            [=] { return readout(ops::global_avg_pool(x)); }, {x}));
  }
  {
    Tensor x = rand_tensor(2, 2, 3, 3, rng);
    results.push_back(check("upsample_nearest_x2",
                            [=] { return readout(ops::upsample_nearest(x, 2)); }, {x}));
  }
  {
    Tensor x = rand_tensor(2, 2, 6, 4, rng);
    results.push_back(check("downsample_avg_x2",
                            [=] { return readout(ops::downsample_avg(x, 2)); }, {x}));
  }
  {
    Tensor a = rand_tensor(2, 2, 3, 3, rng);
    Tensor b = rand_tensor(2, 3, 3, 3, rng);
    results.push_back(check("concat_split", [=] {
      std::vector<Tensor> parts = ops::split_channels(ops::concat_channels({a, b}), {3, 2});
      return ops::add(readout(parts[0]), ops::scale(readout(parts[1]), 2.0));
    }, {a, b}));
  }
  {
    Tensor x = rand_tensor(2, 6, 3, 3, rng);
    const std::vector<Index> perm = {3, 0, 5, 1, 4, 2};
    results.push_back(check("permute_channels",
                            [=] { return readout(ops::permute_channels(x, perm)); }, {x}));
  }
  {
    Tensor a = rand_tensor(2, 3, 4, 4, rng);
    Tensor b = rand_tensor(2, 3, 4, 4, rng);
    results.push_back(check("add_full", [=] { return readout(ops::add(a, b)); }, {a, b}));
    results.push_back(check("mul_full", [=] { return readout(ops::mul(a, b)); }, {a, b}));
  }
  {
    Tensor a = rand_tensor(2, 3, 4, 4, rng);
    Tensor b = rand_tensor(2, 3, 1, 1, rng);
    results.push_back(check("add_per_channel", [=] { return readout(ops::add(a, b)); }, {a, b}));
    results.push_back(check("mul_per_channel", [=] { return readout(ops::mul(a, b)); }, {a, b}));
  }
  {
    Tensor a = rand_tensor(2, 3, 4, 4, rng);
    Tensor b = rand_tensor(2, 1, 4, 4, rng);
    results.push_back(check("add_per_position", [=] { return readout(ops::add(a, b)); }, {a, b}));
    results.push_back(check("mul_per_position", [=] { return readout(ops::mul(a, b)); }, {a, b}));
  }
  {
    Tensor x = rand_tensor(2, 2, 3, 3, rng);
    results.push_back(check("scale", [=] { return readout(ops::scale(x, -1.7)); }, {x}));
  }

  {  // spatial attention gate
    Rng prng(rng.fork());
    Tensor v = rand_tensor(2, 4, 3, 3, rng);
    attention::SpatialAttnParams p = attention::make_spatial_attn(4, prng);
    results.push_back(check("spatial_attention",
                            [=] { return ops::sum(attention::spatial_attention(v, p)); },
                            {v, p.conv.weight, p.conv.bias}));
  }
  {  // channel attention gate
    Rng prng(rng.fork());
    Tensor u = rand_tensor(2, 4, 3, 3, rng);
    attention::ChannelAttnParams p = attention::make_channel_attn(4, prng);
    results.push_back(check("channel_attention",
                            [=] { return ops::sum(attention::channel_attention(u, p)); },
                            {u, p.fc1.weight, p.fc1.bias, p.fc2.weight, p.fc2.bias}));
  }
  {  // plain bottleneck and both attention-gated orderings
    Rng prng(rng.fork());
    Tensor x = rand_tensor(1, 8, 4, 4, rng);
    attention::BlockParams p = attention::make_block(8, 8, prng);
    std::vector<Tensor> wrt = {x,
                               p.bottleneck.reduce.weight, p.bottleneck.reduce.bias,
                               p.bottleneck.mid.weight,    p.bottleneck.mid.bias,
                               p.bottleneck.expand.weight, p.bottleneck.expand.bias,
                               p.spatial.conv.weight,      p.spatial.conv.bias,
                               p.channel.fc1.weight,       p.channel.fc1.bias,
                               p.channel.fc2.weight,       p.channel.fc2.bias};
    results.push_back(check("residual_bottleneck", [=] {
      return ops::sum(layers::residual_bottleneck(x, p.bottleneck));
    }, {x, p.bottleneck.reduce.weight, p.bottleneck.mid.weight, p.bottleneck.expand.weight}));
    results.push_back(check("scarb", [=] {
      return ops::sum(attention::scarb(x, p.bottleneck, p.spatial, p.channel));
    }, wrt));
    results.push_back(check("csarb", [=] {
      return ops::sum(attention::csarb(x, p.bottleneck, p.spatial, p.channel));
    }, wrt));
  }
  {  // shuffle fusion module end-to-end on an 8x8 finest level
    Rng prng(rng.fork());
    csm::PyramidFeatures p;
    p.levels[0] = rand_tensor(1, 4, 8, 8, rng);
    p.levels[1] = rand_tensor(1, 4, 4, 4, rng);
    p.levels[2] = rand_tensor(1, 4, 2, 2, rng);
    p.levels[3] = rand_tensor(1, 4, 1, 1, rng);
    csm::CsmParams cp = csm::make_csm(4, prng);
    std::vector<Tensor> wrt = {p.levels[0], p.levels[1], p.levels[2], p.levels[3]};
    for (const auto& conv : cp.fuse) {
      wrt.push_back(conv.weight);
      wrt.push_back(conv.bias);
    }
    results.push_back(check("csm_forward", [=] {
      csm::PyramidFeatures out = csm::csm_forward(p, {4, 16}, cp);
      Tensor acc = readout(out.levels[0]);
      for (int i = 1; i < 4; ++i) acc = ops::add(acc, readout(out.levels[static_cast<std::size_t>(i)]));
      return acc;
    }, wrt));
  }
  {  // masked top-k keypoint loss, both operands
    Tensor pred = rand_tensor(2, 5, 3, 3, rng);
    Tensor target = rand_tensor(2, 5, 3, 3, rng);
    network::Visibility vis = {{2, 1, 0, 2, 2}, {0, 2, 2, 0, 1}};
    results.push_back(check("keypoint_mse_topk", [=] {
      return network::keypoint_mse_loss(pred, target, vis, 2);
    }, {pred, target}));
  }

  {  // backbone on a two-image batch, spot-checked coordinates
    network::ModelConfig cfg;
    cfg.base_channels = 16;
    network::Model model(cfg, rng.fork());
    Tensor images = rand_tensor(2, 3, cfg.input_h, cfg.input_w, rng);
    std::vector<Tensor> wrt = {images};
    for (const std::string& name : model.parameter_names()) {
      if (name.rfind("backbone", 0) == 0 || name.rfind("stem", 0) == 0) {
        wrt.push_back(model.parameter(name));
      }
    }
    CheckOptions opts;
    opts.max_coords = 24;
    opts.coord_seed = seed + 11;
    // A plain sum of ~25k sigmoids evaluates to ~1.7e4, and rounding that
    // value swamps the difference quotient for small-derivative coordinates.
    // Centering each term at zero keeps the readout O(sqrt(N)) without
    // changing its gradient.
    results.push_back(check("backbone_batch2", [&model, images] {
      csm::PyramidFeatures p = model.backbone(images);
      Tensor acc;
      for (int i = 0; i < 4; ++i) {
        const Tensor& level = p.levels[static_cast<std::size_t>(i)];
        Tensor centered = ops::add(ops::sigmoid(level),
                                   Tensor::full(level.dims(), -0.5));
        acc = i == 0 ? ops::sum(centered) : ops::add(acc, ops::sum(centered));
      }
      return acc;
    }, wrt, opts));
  }
  {  // the complete training loss at full desk scale
    network::ModelConfig cfg;
    cfg.base_channels = 16;
    network::Model model(cfg, rng.fork());
    Tensor images = rand_tensor(1, 3, cfg.input_h, cfg.input_w, rng);

    codec::KeypointSet kps;
    network::Visibility vis(1);
    for (Index j = 0; j < cfg.num_keypoints; ++j) {
      codec::Keypoint kp;
      kp.x = rng.uniform(8.0, static_cast<Scalar>(cfg.input_w) - 8.0);
      kp.y = rng.uniform(8.0, static_cast<Scalar>(cfg.input_h) - 8.0);
      kp.v = j % 5 == 4 ? 0 : 2;
      kps.pts.push_back(kp);
      vis[0].push_back(kp.v);
    }
    Tensor targets = codec::encode(kps, cfg.input_h / 4, cfg.input_w / 4, 2.0).heatmaps;

    std::vector<Tensor> wrt = {images};
    for (const std::string& name : model.parameter_names()) {
      wrt.push_back(model.parameter(name));
    }
    CheckOptions opts;
    opts.max_coords = 64;
    opts.coord_seed = seed + 13;
    // The loss composes two gate stacks, so third derivatives are large and
    // the quotient is truncation-limited; a tighter step keeps the O(step^2)
    // term below tolerance.
    opts.step = 3e-6;
    results.push_back(check("forward_loss_full", [&model, images, targets, &vis] {
      return model.forward_loss(images, targets, vis).total;
    }, wrt, opts));
  }

  return results;
}

}  // namespace shufflepose::gradcheck
