// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Release gate. Eleven numbered end-to-end checks — permutation and metric
// oracles, finite-difference gradients, module identities, an overfit run,
// the ablation grid, schedule and checkpoint fidelity — plus a command-line
// smoke check. One PASS/FAIL line each; exits nonzero if any line fails.
//
// Usage: acceptance [path-to-cli-binary]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shufflepose/attention.hpp"
#include "shufflepose/codec.hpp"
#include "shufflepose/csm.hpp"
#include "shufflepose/gradcheck.hpp"
#include "shufflepose/network.hpp"
#include "shufflepose/oks.hpp"
#include "shufflepose/pipeline/synth.hpp"
#include "shufflepose/pipeline/train.hpp"

namespace fs = std::filesystem;
using namespace shufflepose;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli;      // path to the command-line binary, "" when not given
fs::path g_scratch;     // per-run scratch directory

void fill_uniform(const Tensor& t, Rng& rng, Scalar lo, Scalar hi) {
  Scalar* p = t.data();
  for (Index i = 0; i < t.numel(); ++i) p[i] = rng.uniform(lo, hi);
}

Scalar max_abs_diff(const Tensor& a, const Tensor& b) {
  return (a.array() - b.array()).abs().maxCoeff();
}

struct CmdResult {
  int code = -1;
  std::string out;
};

CmdResult run_command(const std::string& cmd) {
  CmdResult r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.out += buf;
  const int status = pclose(pipe);
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  return r;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string fmt(Scalar v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. Channel shuffle permutation against the reshape-transpose-flatten
//    brute force, for every divisor of every tested width. Budget: 5 s.

bool check_shuffle(std::string& detail) {
  const auto t0 = Clock::now();
  Index perms = 0;
  for (const Index c_total : {4, 8, 16, 64, 1024}) {
    for (Index g = 1; g <= c_total; ++g) {
      if (c_total % g != 0) continue;
      const auto perm = csm::shuffle_permutation({g, c_total});
      // Brute force: lay channels out as a (g, per) grid, read it column-wise.
      const Index per = c_total / g;
      std::vector<Index> want;
      want.reserve(static_cast<std::size_t>(c_total));
      for (Index col = 0; col < per; ++col) {
        for (Index row = 0; row < g; ++row) want.push_back(row * per + col);
      }
      if (perm != want) {
        detail = "mismatch at c=" + std::to_string(c_total) +
                 " g=" + std::to_string(g);
        return false;
      }
      if (g == 1 || g == c_total) {
        std::vector<Index> ident(static_cast<std::size_t>(c_total));
        std::iota(ident.begin(), ident.end(), Index{0});
        if (perm != ident) {
          detail = "g=" + std::to_string(g) + " of c=" + std::to_string(c_total) +
                   " is not the identity";
          return false;
        }
      }
      ++perms;
    }
  }
  const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
  if (dt >= 5.0) {
    detail = "exceeded the 5 s budget: " + fmt(dt) + " s";
    return false;
  }
  detail = std::to_string(perms) + " permutations across 5 widths";
  return true;
}

// ---------------------------------------------------------------------------
// 2. Central finite-difference verification of every differentiable
//    operation, through the full training loss. Budget: 5 min.

bool check_gradients(std::string& detail) {
  const auto t0 = Clock::now();
  const auto results = gradcheck::run_suite(7);
  const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
  Scalar worst = 0.0;
  std::string worst_name = "-";
  for (const auto& r : results) {
    if (!r.pass) {
      detail = "'" + r.name + "' failed with max_rel_err=" + fmt(r.max_rel_err);
      return false;
    }
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_name = r.name;
    }
  }
  if (dt >= 300.0) {
    detail = "exceeded the 5 min budget: " + fmt(dt) + " s";
    return false;
  }
  detail = std::to_string(results.size()) + " checks, worst rel err " +
           fmt(worst) + " (" + worst_name + ")";
  return true;
}

// ---------------------------------------------------------------------------
// 3. Attention gates stay strictly inside (0,1); with zeroed attention
//    parameters the two stage orderings coincide bit-for-bit; with random
//    parameters they separate by more than 1e-6 almost always.

bool check_attention(std::string& detail) {
  Rng rng(31);
  const Index kC = 6;

  // Gate bounds, recovered from the gated outputs on strictly positive input.
  for (int trial = 0; trial < 100; ++trial) {
    Tensor x(1, kC, 5, 4);
    fill_uniform(x, rng, 0.5, 1.5);
    const auto sp = attention::make_spatial_attn(kC, rng);
    const Tensor sy = attention::spatial_attention(x, sp);
    for (Index i = 0; i < 5; ++i) {
      for (Index j = 0; j < 4; ++j) {
        const Scalar beta = sy.at(0, 0, i, j) / x.at(0, 0, i, j);
        if (!(beta > 0.0 && beta < 1.0)) {
          detail = "spatial gate " + fmt(beta) + " outside (0,1) on trial " +
                   std::to_string(trial);
          return false;
        }
      }
    }
    const auto cp = attention::make_channel_attn(kC, rng);
    const Tensor cy = attention::channel_attention(x, cp);
    for (Index c = 0; c < kC; ++c) {
      const Scalar alpha = cy.at(0, c, 0, 0) / x.at(0, c, 0, 0);
      if (!(alpha > 0.0 && alpha < 1.0)) {
        detail = "channel gate " + fmt(alpha) + " outside (0,1) on trial " +
                 std::to_string(trial);
        return false;
      }
    }
  }

  // Zeroed attention parameters pin both gates at one half, so the two
  // orderings compute the same product and must agree exactly.
  for (int trial = 0; trial < 20; ++trial) {
    auto block = attention::make_block(8, 8, rng);
    block.spatial.conv.weight.array().setZero();
    block.spatial.conv.bias.array().setZero();
    block.channel.fc1.weight.array().setZero();
    block.channel.fc1.bias.array().setZero();
    block.channel.fc2.weight.array().setZero();
    block.channel.fc2.bias.array().setZero();
    Tensor x(1, 8, 6, 5);
    fill_uniform(x, rng, -1.0, 1.0);
    const Tensor a =
        attention::scarb(x, block.bottleneck, block.spatial, block.channel);
    const Tensor b =
        attention::csarb(x, block.bottleneck, block.spatial, block.channel);
    if (max_abs_diff(a, b) != 0.0) {
      detail = "zero-parameter orderings differ by " + fmt(max_abs_diff(a, b));
      return false;
    }
  }

  // Random parameters: the gate of the second stage sees a different map
  // depending on the order, so the outputs should separate.
  int separated = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto block = attention::make_block(8, 8, rng);
    fill_uniform(block.spatial.conv.weight, rng, -0.5, 0.5);
    fill_uniform(block.spatial.conv.bias, rng, -0.1, 0.1);
    fill_uniform(block.channel.fc1.weight, rng, -0.5, 0.5);
    fill_uniform(block.channel.fc1.bias, rng, -0.1, 0.1);
    fill_uniform(block.channel.fc2.weight, rng, -0.5, 0.5);
    fill_uniform(block.channel.fc2.bias, rng, -0.1, 0.1);
    Tensor x(1, 8, 6, 5);
    fill_uniform(x, rng, -1.0, 1.0);
    const Tensor a =
        attention::scarb(x, block.bottleneck, block.spatial, block.channel);
    const Tensor b =
        attention::csarb(x, block.bottleneck, block.spatial, block.channel);
    if (max_abs_diff(a, b) > 1e-6) ++separated;
  }
  if (separated < 95) {
    detail = "orderings separated on only " + std::to_string(separated) +
             "/100 trials";
    return false;
  }
  detail = "gates in (0,1); zero-parameter match exact; separated " +
           std::to_string(separated) + "/100";
  return true;
}

// ---------------------------------------------------------------------------
// 4. With one shuffle group, identity fusion convolutions, and the exact
//    resampling roundtrip, the fused half of every shuffle-module output must
//    reproduce the incoming pyramid level; widths double.

bool check_fusion_identity(std::string& detail) {
  Rng rng(47);
  const Index kD = 8;
  csm::PyramidFeatures p;
  Index h = 32, w = 24;
  for (int i = 0; i < 4; ++i) {
    p.levels[static_cast<std::size_t>(i)] = Tensor(1, kD, h, w);
    fill_uniform(p.levels[static_cast<std::size_t>(i)], rng, -1.0, 1.0);
    h /= 2;
    w /= 2;
  }
  auto params = csm::make_csm(kD, rng);
  for (auto& f : params.fuse) layers::identity_init_1x1(f);

  const auto out = csm::csm_forward(p, {1, 4 * kD}, params);
  Scalar worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Dims d = out.levels[i].dims();
    const Dims in = p.levels[i].dims();
    if (d.c != 2 * kD || d.h != in.h || d.w != in.w) {
      detail = "level " + std::to_string(i + 2) + " has shape " +
               std::to_string(d.c) + "x" + std::to_string(d.h) + "x" +
               std::to_string(d.w) + ", want " + std::to_string(2 * kD) +
               " channels";
      return false;
    }
    Scalar fused_dev = 0.0, orig_dev = 0.0;
    for (Index c = 0; c < kD; ++c) {
      for (Index y = 0; y < d.h; ++y) {
        for (Index x = 0; x < d.w; ++x) {
          fused_dev = std::max(fused_dev, std::abs(out.levels[i].at(0, c, y, x) -
                                                   p.levels[i].at(0, c, y, x)));
          orig_dev = std::max(orig_dev, std::abs(out.levels[i].at(0, c + kD, y, x) -
                                                 p.levels[i].at(0, c, y, x)));
        }
      }
    }
    if (fused_dev > 1e-12) {
      detail = "fused half of level " + std::to_string(i + 2) + " deviates by " +
               fmt(fused_dev);
      return false;
    }
    if (orig_dev != 0.0) {
      detail = "pass-through half of level " + std::to_string(i + 2) +
               " deviates by " + fmt(orig_dev);
      return false;
    }
    worst = std::max(worst, fused_dev);
  }
  detail = "widths doubled to " + std::to_string(2 * kD) +
           ", worst fused deviation " + fmt(worst);
  return true;
}

// ---------------------------------------------------------------------------
// 5. Hard-keypoint mining against a sort-and-mean oracle on 1000 random
//    17-way loss vectors; the k = 17 case must equal the plain masked L2.

Scalar mining_oracle(const Tensor& pred, const Tensor& target,
                     const network::Visibility& vis, Index k) {
  const Dims& d = pred.dims();
  Scalar batch = 0.0;
  for (Index n = 0; n < d.n; ++n) {
    std::vector<std::pair<Scalar, Index>> errs;
    for (Index j = 0; j < d.c; ++j) {
      if (vis[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)] <= 0) {
        continue;
      }
      const Scalar e = pred.at(n, j, 0, 0) - target.at(n, j, 0, 0);
      errs.emplace_back(e * e, j);
    }
    if (errs.empty()) continue;
    std::stable_sort(errs.begin(), errs.end(), [](const auto& a, const auto& b) {
      return a.first > b.first;
    });
    const Index m = std::min<Index>(k, static_cast<Index>(errs.size()));
    Scalar s = 0.0;
    for (Index i = 0; i < m; ++i) s += errs[static_cast<std::size_t>(i)].first;
    batch += s / static_cast<Scalar>(m);
  }
  return batch / static_cast<Scalar>(d.n);
}

bool check_mining(std::string& detail) {
  Rng rng(53);
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor pred(1, 17, 1, 1), target(1, 17, 1, 1);
    fill_uniform(pred, rng, -1.0, 1.0);
    fill_uniform(target, rng, -1.0, 1.0);
    network::Visibility vis(1, std::vector<int>(17));
    for (auto& v : vis[0]) v = static_cast<int>(rng.uniform_int(0, 2));

    const Scalar mined = network::ohkm_loss(pred, target, vis, 8).value();
    const Scalar want = mining_oracle(pred, target, vis, 8);
    if (mined != want) {
      detail = "trial " + std::to_string(trial) + ": mined " + fmt(mined) +
               " != oracle " + fmt(want);
      return false;
    }
    const Scalar full = network::ohkm_loss(pred, target, vis, 17).value();
    const Scalar plain = network::l2_loss(pred, target, vis).value();
    if (full != plain) {
      detail = "trial " + std::to_string(trial) + ": k=17 mining " + fmt(full) +
               " != plain L2 " + fmt(plain);
      return false;
    }
  }
  detail = "1000 random vectors, k=8 and k=17 both exact";
  return true;
}

// ---------------------------------------------------------------------------
// 6. Heatmap encode/decode roundtrip on grid-aligned keypoints: recovery
//    within one input pixel, sub-cell offset never above a quarter cell.

bool check_codec_roundtrip(std::string& detail) {
  Rng rng(59);
  const Index kH = 32, kW = 24;
  Scalar worst_err = 0.0, worst_disp = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    codec::KeypointSet set;
    for (int k = 0; k < 5; ++k) {
      const Index gx = rng.uniform_int(0, kW - 1);
      const Index gy = rng.uniform_int(0, kH - 1);
      set.pts.push_back({4.0 * static_cast<Scalar>(gx),
                         4.0 * static_cast<Scalar>(gy), 2});
    }
    const auto enc = codec::encode(set, kH, kW, 2.0);
    const auto dec = codec::decode(enc.heatmaps);
    for (std::size_t k = 0; k < set.pts.size(); ++k) {
      const Scalar err = std::hypot(dec.kps.pts[k].x - set.pts[k].x,
                                    dec.kps.pts[k].y - set.pts[k].y);
      if (err > 1.0 + 1e-12) {
        detail = "trial " + std::to_string(trial) + " keypoint " +
                 std::to_string(k) + " off by " + fmt(err) + " px";
        return false;
      }
      worst_err = std::max(worst_err, err);

      // Recompute the argmax cell and measure the decoded displacement.
      Index by = 0, bx = 0;
      Scalar best = enc.heatmaps.at(0, static_cast<Index>(k), 0, 0);
      for (Index y = 0; y < kH; ++y) {
        for (Index x = 0; x < kW; ++x) {
          const Scalar v = enc.heatmaps.at(0, static_cast<Index>(k), y, x);
          if (v > best) {
            best = v;
            by = y;
            bx = x;
          }
        }
      }
      const Scalar disp =
          std::hypot(dec.kps.pts[k].x / 4.0 - static_cast<Scalar>(bx),
                     dec.kps.pts[k].y / 4.0 - static_cast<Scalar>(by));
      if (disp > 0.25 + 1e-12) {
        detail = "sub-cell displacement " + fmt(disp) + " grid cells on trial " +
                 std::to_string(trial);
        return false;
      }
      worst_disp = std::max(worst_disp, disp);
    }
  }
  detail = "500 keypoints; worst error " + fmt(worst_err) +
           " px, worst displacement " + fmt(worst_disp) + " cells";
  return true;
}

// ---------------------------------------------------------------------------
// 7. Similarity-thresholded precision against an independent brute-force
//    matcher with 101-point interpolation, plus the two closed-form cases.

struct PrOracleOut {
  std::vector<Scalar> per_threshold;
  Scalar ar = 0.0;
};

PrOracleOut pr_oracle(const std::vector<oks::Detection>& preds,
                      const std::vector<oks::GroundTruth>& gts,
                      const oks::OksConstants& consts,
                      const std::vector<Scalar>& thresholds, Index max_det) {
  std::vector<std::size_t> usable;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    bool any = false;
    for (const auto& p : gts[g].kps.pts) any = any || p.v > 0;
    if (any) usable.push_back(g);
  }
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].score > preds[b].score;
  });
  std::map<Index, Index> seen;
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    if (++seen[preds[i].image_id] <= max_det) kept.push_back(i);
  }

  PrOracleOut out;
  Scalar recall_acc = 0.0;
  for (Scalar t : thresholds) {
    std::vector<bool> used(usable.size(), false);
    std::vector<bool> tp;
    Index hits = 0;
    for (std::size_t i : kept) {
      Scalar best = -1.0;
      std::size_t bg = usable.size();
      for (std::size_t g = 0; g < usable.size(); ++g) {
        if (used[g] || gts[usable[g]].image_id != preds[i].image_id) continue;
        const Scalar v = oks::oks(preds[i].kps, gts[usable[g]].kps,
                                  gts[usable[g]].area, consts);
        if (v > best) {
          best = v;
          bg = g;
        }
      }
      const bool hit = bg < usable.size() && best >= t;
      if (hit) {
        used[bg] = true;
        ++hits;
      }
      tp.push_back(hit);
    }
    std::vector<Scalar> rec, prec;
    Index tps = 0, fps = 0;
    for (const bool h : tp) {
      h ? ++tps : ++fps;
      rec.push_back(static_cast<Scalar>(tps) / static_cast<Scalar>(usable.size()));
      prec.push_back(static_cast<Scalar>(tps) / static_cast<Scalar>(tps + fps));
    }
    for (std::size_t i = prec.size(); i-- > 1;) {
      prec[i - 1] = std::max(prec[i - 1], prec[i]);
    }
    Scalar acc = 0.0;
    for (int s = 0; s <= 100; ++s) {
      const Scalar r = static_cast<Scalar>(s) / 100.0;
      auto it = std::lower_bound(rec.begin(), rec.end(), r);
      if (it != rec.end()) acc += prec[static_cast<std::size_t>(it - rec.begin())];
    }
    out.per_threshold.push_back(acc / 101.0);
    recall_acc += static_cast<Scalar>(hits) / static_cast<Scalar>(usable.size());
  }
  out.ar = recall_acc / static_cast<Scalar>(thresholds.size());
  return out;
}

bool check_similarity_metrics(std::string& detail) {
  const auto consts = oks::OksConstants::uniform(1, 0.1);
  auto one = [](Scalar x, Scalar y) {
    codec::KeypointSet s;
    s.pts.push_back({x, y, 2});
    return s;
  };

  // Closed form: one keypoint at distance 1 with unit constant k=0.1 and
  // area 100 sits at exp(-1 / (2 * 100 * 0.01)) = exp(-1/2).
  const Scalar sim = oks::oks(one(11, 10), one(10, 10), 100.0, consts);
  if (std::abs(sim - std::exp(-0.5)) > 1e-12) {
    detail = "closed-form similarity " + fmt(sim) + " != exp(-1/2)";
    return false;
  }

  // Hand-built scenario: three ground truths, four scored predictions, one
  // near miss, one exact hit, one far miss, one duplicate competitor.
  std::vector<oks::GroundTruth> gts = {
      {0, one(10, 10), 100.0}, {0, one(30, 10), 100.0}, {0, one(50, 10), 100.0}};
  std::vector<oks::Detection> preds = {{0, one(11, 10), 0.9},
                                       {0, one(30, 10), 0.8},
                                       {0, one(50, 18), 0.7},
                                       {0, one(31, 10), 0.6}};
  const auto got = oks::average_precision(preds, gts, consts);
  const auto want = pr_oracle(preds, gts, consts, oks::default_thresholds(), 20);
  if (got.per_threshold.size() != want.per_threshold.size()) {
    detail = "threshold count mismatch";
    return false;
  }
  for (std::size_t i = 0; i < want.per_threshold.size(); ++i) {
    if (got.per_threshold[i] != want.per_threshold[i]) {
      detail = "threshold " + std::to_string(i) + ": " +
               fmt(got.per_threshold[i]) + " != oracle " +
               fmt(want.per_threshold[i]);
      return false;
    }
  }
  const Scalar mean_ap =
      std::accumulate(want.per_threshold.begin(), want.per_threshold.end(), 0.0) /
      static_cast<Scalar>(want.per_threshold.size());
  if (got.ap != mean_ap || got.ar != want.ar) {
    detail = "summary mismatch: ap " + fmt(got.ap) + " vs " + fmt(mean_ap) +
             ", ar " + fmt(got.ar) + " vs " + fmt(want.ar);
    return false;
  }

  // Predictions identical to the ground truth: every figure is perfect.
  std::vector<oks::Detection> exact = {
      {0, one(10, 10), 0.9}, {0, one(30, 10), 0.8}, {0, one(50, 10), 0.7}};
  const auto perfect = oks::average_precision(exact, gts, consts);
  if (perfect.ap != 1.0 || perfect.ap50 != 1.0 || perfect.ap75 != 1.0 ||
      perfect.ar != 1.0) {
    detail = "perfect predictions scored ap=" + fmt(perfect.ap) +
             " ar=" + fmt(perfect.ar);
    return false;
  }
  detail = "oracle exact on 3 gts / 4 preds; perfect set scores 1.0; "
           "closed form within 1e-12";
  return true;
}

// ---------------------------------------------------------------------------
// 8. Overfit: base width 16, four shuffle groups, attention blocks, top-8
//    mining, four samples. Loss must fall below 1% of its first value within
//    the step budget, and short reruns must be bit-identical. Budget: 10 min.

pipeline::Config overfit_config() {
  pipeline::Config cfg;
  cfg.model.base_channels = 16;
  cfg.model.groups = 4;
  cfg.model.variant = attention::Variant::kScarb;
  cfg.model.ohkm_k = 8;
  cfg.train.dataset_size = 4;
  cfg.train.val_size = 1;
  cfg.train.batch_size = 4;
  cfg.train.total_epochs = 400;
  cfg.train.decay_epochs = {260, 340};
  cfg.train.decay_epochs_set = true;
  cfg.train.augment = false;
  cfg.train.seed = 11;
  return cfg;
}

bool check_overfit(std::string& detail) {
  const auto t0 = Clock::now();
  const auto cfg = overfit_config();
  const auto run = pipeline::train(cfg, (g_scratch / "overfit").string());
  if (run.steps > 2000) {
    detail = "used " + std::to_string(run.steps) + " steps (budget 2000)";
    return false;
  }
  if (!(run.final_total < 0.01 * run.first_total)) {
    detail = "loss " + fmt(run.first_total) + " -> " + fmt(run.final_total) +
             " did not cross 1%";
    return false;
  }

  // Determinism probe: two fresh short runs, identical logs and checkpoints.
  auto short_cfg = cfg;
  short_cfg.train.total_epochs = 40;
  short_cfg.train.decay_epochs = {26, 34};
  const auto a = pipeline::train(short_cfg, (g_scratch / "overfit_a").string());
  const auto b = pipeline::train(short_cfg, (g_scratch / "overfit_b").string());
  if (a.loss_lines != b.loss_lines) {
    detail = "rerun produced different loss logs";
    return false;
  }
  if (read_bytes(a.checkpoint_path) != read_bytes(b.checkpoint_path)) {
    detail = "rerun produced different checkpoint bytes";
    return false;
  }

  const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
  if (dt >= 600.0) {
    detail = "exceeded the 10 min budget: " + fmt(dt) + " s";
    return false;
  }
  detail = fmt(run.first_total) + " -> " + fmt(run.final_total) + " (" +
           fmt(100.0 * run.final_total / run.first_total) + "%) in " +
           std::to_string(run.steps) + " steps; reruns bit-identical";
  return true;
}

// ---------------------------------------------------------------------------
// 9. Ablation grid on the 64-sample benchmark: the four-variant report must
//    generate, and the built-in rerun must reproduce the first row exactly.
//    The relative ordering is recorded in the table, not asserted.

bool check_ablation(std::string& detail) {
  pipeline::Config base;
  base.model.base_channels = 8;
  base.model.groups = 2;
  base.model.ohkm_k = 8;
  base.train.dataset_size = 64;
  base.train.val_size = 8;
  base.train.batch_size = 8;
  base.train.total_epochs = 40;
  base.train.augment = false;
  base.train.seed = 5;

  const fs::path dir = g_scratch / "ablation";
  const std::string table = pipeline::run_ablation(base, dir.string());
  for (const char* row :
       {"baseline", "shuffle", "attention", "shuffle_attention"}) {
    if (table.find(row) == std::string::npos) {
      detail = std::string("report is missing the '") + row + "' row";
      return false;
    }
  }
  if (table.find("bit-identical") == std::string::npos) {
    detail = "the rerun did not reproduce the first row";
    return false;
  }
  if (!fs::exists(dir / "ablation.txt")) {
    detail = "ablation.txt was not written";
    return false;
  }
  std::cout << "      --- recorded ablation table ---\n";
  std::istringstream lines(table);
  for (std::string line; std::getline(lines, line);) {
    std::cout << "      " << line << '\n';
  }
  detail = "four variants trained, rerun bit-identical";
  return true;
}

// ---------------------------------------------------------------------------
// 10. The stepped schedule hits its three plateaus exactly.

bool check_schedule(std::string& detail) {
  const pipeline::TrainConfig cfg;  // stock recipe: decay at 90 and 120 of 140
  const struct {
    Index epoch;
    Scalar want;
  } probes[] = {{0, 5e-4},  {89, 5e-4},  {90, 5e-5},
                {119, 5e-5}, {120, 5e-6}, {139, 5e-6}};
  for (const auto& p : probes) {
    const Scalar got = pipeline::lr_schedule(p.epoch, cfg);
    if (got != p.want) {
      detail = "epoch " + std::to_string(p.epoch) + ": " + fmt(got) +
               " != " + fmt(p.want);
      return false;
    }
  }
  detail = "5e-4 / 5e-5 / 5e-6 exact at both boundaries";
  return true;
}

// ---------------------------------------------------------------------------
// 11. Checkpoint fidelity: save -> load -> forward is bit-identical, and the
//     command-line driver rejects a corrupted file with exit code 3.

bool check_checkpoint(std::string& detail) {
  network::ModelConfig mc;
  mc.base_channels = 8;
  mc.groups = 2;
  const Tensor image = pipeline::make_dataset(1, 99, mc.input_h, mc.input_w)
                           .front()
                           .image;

  network::Model a(mc, 41);
  const Tensor before = a.infer(image);
  const fs::path ckpt = g_scratch / "roundtrip.ppck";
  pipeline::save_training_state(ckpt.string(), a, nullptr, nullptr);

  network::Model b(mc, 52);  // different seed: every parameter starts apart
  pipeline::load_training_state(ckpt.string(), b, nullptr, nullptr);
  const Tensor after = b.infer(image);
  if (max_abs_diff(before, after) != 0.0) {
    detail = "reloaded forward deviates by " + fmt(max_abs_diff(before, after));
    return false;
  }

  if (g_cli.empty()) {
    detail = "no CLI path given; cannot check the corrupt-file exit code";
    return false;
  }
  std::string bytes = read_bytes(ckpt);
  bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x01);
  const fs::path bad = g_scratch / "corrupt.ppck";
  std::ofstream(bad, std::ios::binary).write(bytes.data(),
                                             static_cast<long>(bytes.size()));

  const fs::path cfg_path = g_scratch / "eval.cfg";
  write_text(cfg_path,
             "base_channels = 8\ngroups = 2\nval_size = 1\n"
             "dataset_size = 2\nbatch_size = 2\nseed = 41\n");
  const auto good = run_command(g_cli + " eval --config " + cfg_path.string() +
                                " --checkpoint " + ckpt.string() + " --out " +
                                (g_scratch / "eval_good").string());
  if (good.code != 0) {
    detail = "eval of the intact checkpoint exited " + std::to_string(good.code);
    return false;
  }
  const auto corrupt = run_command(g_cli + " eval --config " + cfg_path.string() +
                                   " --checkpoint " + bad.string() + " --out " +
                                   (g_scratch / "eval_bad").string());
  if (corrupt.code != 3) {
    detail = "corrupt checkpoint exited " + std::to_string(corrupt.code) +
             ", want 3";
    return false;
  }
  detail = "forward bit-identical after reload; corrupt file exits 3";
  return true;
}

// ---------------------------------------------------------------------------
// 12. Command-line smoke: the demo prints the known permutation and a config
//     violation exits with code 2.

bool check_cli(std::string& detail) {
  if (g_cli.empty()) {
    detail = "no CLI path given";
    return false;
  }
  const auto demo = run_command(g_cli + " shuffle-demo 8 --groups 2");
  if (demo.code != 0 || demo.out.find("0 4 1 5 2 6 3 7") == std::string::npos) {
    detail = "shuffle demo exited " + std::to_string(demo.code) +
             " without the expected permutation";
    return false;
  }
  const fs::path bad_cfg = g_scratch / "bad.cfg";
  write_text(bad_cfg, "no_such_key = 1\n");
  const auto bad = run_command(g_cli + " train --config " + bad_cfg.string() +
                               " --out " + (g_scratch / "cli_out").string());
  if (bad.code != 2) {
    detail = "unknown config key exited " + std::to_string(bad.code) +
             ", want 2";
    return false;
  }
  detail = "demo permutation printed; unknown key exits 2";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli = argv[1];
  g_scratch = fs::temp_directory_path() / "shufflepose_acceptance";
  fs::remove_all(g_scratch);
  fs::create_directories(g_scratch);

  struct Gate {
    int id;
    const char* label;
    bool (*run)(std::string&);
  };
  const Gate gates[] = {
      {1, "shuffle permutation vs brute-force oracle", check_shuffle},
      {2, "finite-difference gradient suite", check_gradients},
      {3, "attention gate bounds and stage-order separation", check_attention},
      {4, "shuffle-module identity regression", check_fusion_identity},
      {5, "hard-keypoint mining vs sort-and-mean oracle", check_mining},
      {6, "heatmap encode/decode roundtrip", check_codec_roundtrip},
      {7, "similarity metrics vs brute-force matcher", check_similarity_metrics},
      {8, "four-sample overfit and determinism", check_overfit},
      {9, "four-variant ablation report", check_ablation},
      {10, "learning-rate plateaus exact", check_schedule},
      {11, "checkpoint roundtrip and corrupt-file rejection", check_checkpoint},
      {12, "command-line smoke", check_cli},
  };

  int failures = 0;
  for (const Gate& g : gates) {
    std::string detail;
    bool ok = false;
    const auto t0 = Clock::now();
    try {
      ok = g.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("[%2d] %s  %-52s (%6.2fs)  %s\n", g.id, ok ? "PASS" : "FAIL",
                g.label, dt, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }

  if (failures == 0) {
    std::printf("all %zu checks passed\n", std::size(gates));
    return 0;
  }
  std::printf("%d check(s) FAILED\n", failures);
  return 1;
}
