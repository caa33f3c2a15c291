// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/oks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace shufflepose::oks {

OksConstants OksConstants::uniform(Index num_keypoints, Scalar value) {
  if (value <= 0.0) throw ConfigError("oks constants must be positive");
  OksConstants c;
  c.k.assign(static_cast<std::size_t>(num_keypoints), value);
  return c;
}

OksConstants OksConstants::coco() {
  // nose, eyes, ears, shoulders, elbows, wrists, hips, knees, ankles.
  OksConstants c;
  c.k = {0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072,
         0.062, 0.062, 0.107, 0.107, 0.087, 0.087, 0.089, 0.089};
  return c;
}

Scalar oks(const codec::KeypointSet& pred, const codec::KeypointSet& gt,
           Scalar area, const OksConstants& consts) {
  if (area <= 0.0) {
    throw DataError("oks: area must be positive, got " + std::to_string(area));
  }
  if (pred.pts.size() != gt.pts.size() || gt.pts.size() != consts.k.size()) {
    throw ShapeError("oks: keypoint counts disagree (pred " +
                     std::to_string(pred.pts.size()) + ", gt " +
                     std::to_string(gt.pts.size()) + ", consts " +
                     std::to_string(consts.k.size()) + ")");
  }
  Scalar acc = 0.0;
  Index visible = 0;
  for (std::size_t i = 0; i < gt.pts.size(); ++i) {
    if (gt.pts[i].v <= 0) continue;
    const Scalar dx = pred.pts[i].x - gt.pts[i].x;
    const Scalar dy = pred.pts[i].y - gt.pts[i].y;
    const Scalar ki = consts.k[i];
    acc += std::exp(-(dx * dx + dy * dy) / (2.0 * area * ki * ki));
    ++visible;
  }
  if (visible == 0) {
    throw DataError("oks: ground truth has no visible keypoints");
  }
  return acc / static_cast<Scalar>(visible);
}

Box tight_box(const codec::KeypointSet& kps) {
  Box b;
  bool any = false;
  Scalar x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  for (const auto& p : kps.pts) {
    if (p.v <= 0) continue;
    if (!any) {
      x0 = x1 = p.x;
      y0 = y1 = p.y;
      any = true;
    } else {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  }
  if (any) {
    b.x = x0;
    b.y = y0;
    b.w = x1 - x0;
    b.h = y1 - y0;
  }
  return b;
}

std::vector<Scalar> default_thresholds() {
  std::vector<Scalar> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

namespace {

// 101-point interpolated average precision from a TP/FP sequence in score
// order: precision envelope sampled at recall 0.00, 0.01, ..., 1.00.
Scalar interpolated_ap(const std::vector<bool>& tp, Index n_gt) {
  std::vector<Scalar> recall, precision;
  Index tps = 0, fps = 0;
  for (bool hit : tp) {
    hit ? ++tps : ++fps;
    recall.push_back(static_cast<Scalar>(tps) / static_cast<Scalar>(n_gt));
    precision.push_back(static_cast<Scalar>(tps) / static_cast<Scalar>(tps + fps));
  }
  // Envelope: precision at recall >= r.
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  Scalar acc = 0.0;
  for (int s = 0; s <= 100; ++s) {
    const Scalar r = static_cast<Scalar>(s) / 100.0;
    auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) {
      acc += precision[static_cast<std::size_t>(it - recall.begin())];
    }
  }
  return acc / 101.0;
}

}  // namespace

ApSummary average_precision(const std::vector<Detection>& preds,
                            const std::vector<GroundTruth>& gts,
                            const OksConstants& consts,
                            const std::vector<Scalar>& thresholds,
                            Index max_detections) {
  for (Scalar t : thresholds) {
    if (t <= 0.0 || t >= 1.0) {
      throw ConfigError("average_precision: thresholds must lie in (0, 1)");
    }
  }

  // Ground truths with no visible keypoints have undefined OKS; drop them.
  std::vector<const GroundTruth*> usable;
  for (const auto& g : gts) {
    bool any = false;
    for (const auto& p : g.kps.pts) any = any || p.v > 0;
    if (any) usable.push_back(&g);
  }

  ApSummary s;
  if (usable.empty() && preds.empty()) {
    return s;  // undefined
  }
  s.defined = true;
  if (usable.empty()) {
    s.per_threshold.assign(thresholds.size(), 0.0);
    return s;  // nonempty predictions, nothing to match: AP 0
  }

  // Score-descending order, stable so equal scores keep insertion order;
  // at most max_detections per image survive.
  std::vector<Index> order(preds.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return preds[static_cast<std::size_t>(a)].score > preds[static_cast<std::size_t>(b)].score;
  });
  std::map<Index, Index> per_image;
  std::vector<Index> kept;
  for (Index i : order) {
    if (++per_image[preds[static_cast<std::size_t>(i)].image_id] <= max_detections) {
      kept.push_back(i);
    }
  }

  const Index n_gt = static_cast<Index>(usable.size());
  Scalar recall_acc = 0.0;
  for (Scalar t : thresholds) {
    std::vector<bool> matched(usable.size(), false);
    std::vector<bool> tp;
    tp.reserve(kept.size());
    Index hits = 0;
    for (Index i : kept) {
      const Detection& det = preds[static_cast<std::size_t>(i)];
      Scalar best = -1.0;
      std::size_t best_g = 0;
      for (std::size_t g = 0; g < usable.size(); ++g) {
        if (matched[g] || usable[g]->image_id != det.image_id) continue;
        const Scalar v = oks(det.kps, usable[g]->kps, usable[g]->area, consts);
        if (v > best) {
          best = v;
          best_g = g;
        }
      }
      if (best >= t) {
        matched[best_g] = true;
        tp.push_back(true);
        ++hits;
      } else {
        tp.push_back(false);
      }
    }
    s.per_threshold.push_back(interpolated_ap(tp, n_gt));
    recall_acc += static_cast<Scalar>(hits) / static_cast<Scalar>(n_gt);
  }

  s.ap = std::accumulate(s.per_threshold.begin(), s.per_threshold.end(), 0.0) /
         static_cast<Scalar>(s.per_threshold.size());
  s.ar = recall_acc / static_cast<Scalar>(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (std::abs(thresholds[i] - 0.50) < 1e-9) s.ap50 = s.per_threshold[i];
    if (std::abs(thresholds[i] - 0.75) < 1e-9) s.ap75 = s.per_threshold[i];
  }
  return s;
}

std::string report_lines(const ApSummary& s) {
  std::ostringstream os;
  os.precision(17);
  if (!s.defined) {
    os << "AP = undefined\nAP50 = undefined\nAP75 = undefined\nAR = undefined\n";
    return os.str();
  }
  os << "AP = " << s.ap << "\n"
     << "AP50 = " << s.ap50 << "\n"
     << "AP75 = " << s.ap75 << "\n"
     << "AR = " << s.ar << "\n";
  return os.str();
}

}  // namespace shufflepose::oks
