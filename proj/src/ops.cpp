// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace shufflepose::ops {

namespace {

using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void maybe_record(std::vector<Tensor> tensors, std::function<void()> adjoint) {
  if (Tape* tape = Tape::active()) {
    tape->record(std::move(tensors), std::move(adjoint));
  }
}

// Largest ow in [0, out_w) with 0 <= ow*stride + k - pad < in_w, plus the
// first valid ow. Returns {lo, hi} half-open; empty when lo >= hi.
std::pair<Index, Index> valid_out_range(Index out_w, Index in_w, Index k, int stride, int pad) {
  // need ow*stride >= pad - k  and  ow*stride < in_w + pad - k
  Index lo = 0;
  if (pad - k > 0) lo = (pad - k + stride - 1) / stride;
  Index hi_excl = in_w + pad - k;
  Index hi = hi_excl > 0 ? (hi_excl + stride - 1) / stride : 0;
  return {std::min(lo, out_w), std::min(hi, out_w)};
}

// Sum by recursive halving. On a power-of-two count of identical values every
// partial sum is an exact exponent shift, which is what lets downsample_avg
// invert upsample_nearest bit-for-bit; on general data it also rounds better
// than a running sum.
Scalar pairwise_sum(const Scalar* p, Index n) {
  if (n == 1) return p[0];
  if (n == 2) return p[0] + p[1];
  const Index half = n / 2;
  return pairwise_sum(p, half) + pairwise_sum(p + half, n - half);
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int pad) {
  const Dims& xd = input.dims();
  const Dims& wd = weight.dims();
  if (stride < 1) throw ShapeError("conv2d: stride must be >= 1, got " + std::to_string(stride));
  if (pad < 0) throw ShapeError("conv2d: pad must be >= 0, got " + std::to_string(pad));
  if (xd.c != wd.c) {
    throw ShapeError("conv2d: channel axis mismatch, input has " + std::to_string(xd.c) +
                     " channels but weight expects " + std::to_string(wd.c));
  }
  if (bias.dims() != Dims{1, wd.n, 1, 1}) {
    throw ShapeError("conv2d: bias channel axis must be (1, " + std::to_string(wd.n) +
                     ", 1, 1), got " + to_string(bias.dims()));
  }
  const Index out_h = (xd.h + 2 * pad - wd.h) / stride + 1;
  const Index out_w = (xd.w + 2 * pad - wd.w) / stride + 1;
  if (xd.h + 2 * pad < wd.h || xd.w + 2 * pad < wd.w) {
    throw ShapeError("conv2d: kernel exceeds padded input on a spatial axis (" +
                     to_string(xd) + " vs kernel " + std::to_string(wd.h) + "x" +
                     std::to_string(wd.w) + ", pad " + std::to_string(pad) + ")");
  }

  Tensor out(xd.n, wd.n, out_h, out_w);
  const Index plane_out = out_h * out_w;
  const Index plane_in = xd.h * xd.w;

  for (Index n = 0; n < xd.n; ++n) {
    for (Index co = 0; co < wd.n; ++co) {
      Scalar* op = out.data() + out.offset(n, co, 0, 0);
      VecMap(op, plane_out).setConstant(bias.data()[co]);
      for (Index ci = 0; ci < xd.c; ++ci) {
        const Scalar* ip = input.data() + input.offset(n, ci, 0, 0);
        for (Index kh = 0; kh < wd.h; ++kh) {
          for (Index kw = 0; kw < wd.w; ++kw) {
            const Scalar w = weight.at(co, ci, kh, kw);
            if (w == 0.0) continue;
            auto [wlo, whi] = valid_out_range(out_w, xd.w, kw, stride, pad);
            if (wlo >= whi) continue;
            for (Index oh = 0; oh < out_h; ++oh) {
              const Index ih = oh * stride + kh - pad;
              if (ih < 0 || ih >= xd.h) continue;
              Scalar* orow = op + oh * out_w;
              const Scalar* irow = ip + ih * xd.w - pad + kw;
              if (stride == 1) {
                VecMap(orow + wlo, whi - wlo) +=
                    w * ConstVecMap(irow + wlo, whi - wlo);
              } else {
                for (Index ow = wlo; ow < whi; ++ow) {
                  orow[ow] += w * irow[ow * stride];
                }
              }
            }
          }
        }
      }
    }
  }
  (void)plane_in;

  maybe_record({input, weight, bias, out}, [=]() mutable {
    const Dims& oxd = input.dims();
    const Dims& owd = weight.dims();
    Scalar* gin = input.grad();
    Scalar* gw = weight.grad();
    Scalar* gb = bias.grad();
    const Scalar* gout = out.grad();
    const Index oh_n = out.dims().h, ow_n = out.dims().w;
    for (Index n = 0; n < oxd.n; ++n) {
      for (Index co = 0; co < owd.n; ++co) {
        const Scalar* gop = gout + out.offset(n, co, 0, 0);
        gb[co] += ConstVecMap(gop, oh_n * ow_n).sum();
        for (Index ci = 0; ci < oxd.c; ++ci) {
          const Scalar* ip = input.data() + input.offset(n, ci, 0, 0);
          Scalar* gip = gin + input.offset(n, ci, 0, 0);
          for (Index kh = 0; kh < owd.h; ++kh) {
            for (Index kw = 0; kw < owd.w; ++kw) {
              const Scalar w = weight.at(co, ci, kh, kw);
              Scalar acc = 0.0;
              auto [wlo, whi] = valid_out_range(ow_n, oxd.w, kw, stride, pad);
              if (wlo >= whi) continue;
              for (Index oh = 0; oh < oh_n; ++oh) {
                const Index ih = oh * stride + kh - pad;
                if (ih < 0 || ih >= oxd.h) continue;
                const Scalar* gorow = gop + oh * ow_n;
                const Scalar* irow = ip + ih * oxd.w - pad + kw;
                Scalar* girow = gip + ih * oxd.w - pad + kw;
                if (stride == 1) {
                  const Index len = whi - wlo;
                  acc += ConstVecMap(gorow + wlo, len).dot(ConstVecMap(irow + wlo, len));
                  VecMap(girow + wlo, len) += w * ConstVecMap(gorow + wlo, len);
                } else {
                  for (Index ow = wlo; ow < whi; ++ow) {
                    acc += gorow[ow] * irow[ow * stride];
                    girow[ow * stride] += w * gorow[ow];
                  }
                }
              }
              gw[weight.offset(co, ci, kh, kw)] += acc;
            }
          }
        }
      }
    }
  });
  return out;
}

Tensor fully_connected(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  const Dims& xd = input.dims();
  const Dims& wd = weight.dims();
  if (xd.h != 1 || xd.w != 1) {
    throw ShapeError("fully_connected: input must be channel vectors (n, C, 1, 1), got " +
                     to_string(xd));
  }
  if (wd.n != wd.c || wd.h != 1 || wd.w != 1) {
    throw ShapeError("fully_connected: weight must be square (C, C, 1, 1), got " + to_string(wd));
  }
  if (wd.c != xd.c) {
    throw ShapeError("fully_connected: channel axis mismatch, input length " +
                     std::to_string(xd.c) + " vs weight side " + std::to_string(wd.c));
  }
  if (bias.dims() != Dims{1, wd.n, 1, 1}) {
    throw ShapeError("fully_connected: bias must be (1, " + std::to_string(wd.n) + ", 1, 1), got " +
                     to_string(bias.dims()));
  }

  const Index n = xd.n, c = xd.c;
  Tensor out(n, c, 1, 1);
  {
    Eigen::Map<const RowMat> X(input.data(), n, c);
    Eigen::Map<const RowMat> W(weight.data(), c, c);
    Eigen::Map<RowMat> Y(out.data(), n, c);
    Y.noalias() = X * W.transpose();
    Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data(), c);
  }

  maybe_record({input, weight, bias, out}, [=]() mutable {
    Eigen::Map<const RowMat> X(input.data(), n, c);
    Eigen::Map<const RowMat> W(weight.data(), c, c);
    Eigen::Map<const RowMat> GY(out.grad(), n, c);
    Eigen::Map<RowMat> GX(input.grad(), n, c);
    Eigen::Map<RowMat> GW(weight.grad(), c, c);
    GX.noalias() += GY * W;
    GW.noalias() += GY.transpose() * X;
    Eigen::Map<Eigen::RowVectorXd>(bias.grad(), c) += GY.colwise().sum();
  });
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out(x.dims());
  out.array() = x.array().max(0.0);
  maybe_record({x, out}, [=]() mutable {
    x.grad_array() += (x.array() > 0.0).cast<Scalar>() * out.grad_array();
  });
  return out;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out(x.dims());
  const Scalar* xp = x.data();
  Scalar* op = out.data();
  for (Index i = 0; i < x.numel(); ++i) {
    const Scalar v = xp[i];
    if (v >= 0.0) {
      op[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const Scalar e = std::exp(v);
      op[i] = e / (1.0 + e);
    }
  }
  maybe_record({x, out}, [=]() mutable {
    x.grad_array() += out.array() * (1.0 - out.array()) * out.grad_array();
  });
  return out;
}

Tensor global_avg_pool(const Tensor& x) {
  const Dims& d = x.dims();
  if (d.h * d.w < 1) {
    throw ShapeError("global_avg_pool: empty spatial axis in " + to_string(d));
  }
  Tensor out(d.n, d.c, 1, 1);
  const Index plane = d.h * d.w;
  for (Index n = 0; n < d.n; ++n) {
    for (Index c = 0; c < d.c; ++c) {
      out.at(n, c, 0, 0) = ConstVecMap(x.data() + x.offset(n, c, 0, 0), plane).mean();
    }
  }
  maybe_record({x, out}, [=]() mutable {
    const Dims& dd = x.dims();
    const Index pl = dd.h * dd.w;
    const Scalar inv = 1.0 / static_cast<Scalar>(pl);
    for (Index n = 0; n < dd.n; ++n) {
      for (Index c = 0; c < dd.c; ++c) {
        VecMap(x.grad() + x.offset(n, c, 0, 0), pl).array() +=
            out.grad()[out.offset(n, c, 0, 0)] * inv;
      }
    }
  });
  return out;
}

Tensor upsample_nearest(const Tensor& x, int factor) {
  if (factor < 1) throw ShapeError("upsample_nearest: factor must be >= 1");
  const Dims& d = x.dims();
  Tensor out(d.n, d.c, d.h * factor, d.w * factor);
  for (Index n = 0; n < d.n; ++n) {
    for (Index c = 0; c < d.c; ++c) {
      const Scalar* ip = x.data() + x.offset(n, c, 0, 0);
      Scalar* op = out.data() + out.offset(n, c, 0, 0);
      for (Index oh = 0; oh < d.h * factor; ++oh) {
        const Scalar* irow = ip + (oh / factor) * d.w;
        Scalar* orow = op + oh * d.w * factor;
        for (Index iw = 0; iw < d.w; ++iw) {
          VecMap(orow + iw * factor, factor).setConstant(irow[iw]);
        }
      }
    }
  }
  maybe_record({x, out}, [=]() mutable {
    const Dims& dd = x.dims();
    for (Index n = 0; n < dd.n; ++n) {
      for (Index c = 0; c < dd.c; ++c) {
        Scalar* gip = x.grad() + x.offset(n, c, 0, 0);
        const Scalar* gop = out.grad() + out.offset(n, c, 0, 0);
        for (Index oh = 0; oh < dd.h * factor; ++oh) {
          const Scalar* gorow = gop + oh * dd.w * factor;
          Scalar* girow = gip + (oh / factor) * dd.w;
          for (Index iw = 0; iw < dd.w; ++iw) {
            girow[iw] += ConstVecMap(gorow + iw * factor, factor).sum();
          }
        }
      }
    }
  });
  return out;
}

Tensor downsample_avg(const Tensor& x, int factor) {
  if (factor < 1) throw ShapeError("downsample_avg: factor must be >= 1");
  const Dims& d = x.dims();
  if (d.h % factor != 0) {
    throw ShapeError("downsample_avg: height " + std::to_string(d.h) +
                     " not divisible by factor " + std::to_string(factor));
  }
  if (d.w % factor != 0) {
    throw ShapeError("downsample_avg: width " + std::to_string(d.w) +
                     " not divisible by factor " + std::to_string(factor));
  }
  const Index oh_n = d.h / factor, ow_n = d.w / factor;
  const Scalar inv = 1.0 / (static_cast<Scalar>(factor) * static_cast<Scalar>(factor));
  Tensor out(d.n, d.c, oh_n, ow_n);
  std::vector<Scalar> rows(static_cast<std::size_t>(factor));
  for (Index n = 0; n < d.n; ++n) {
    for (Index c = 0; c < d.c; ++c) {
      const Scalar* ip = x.data() + x.offset(n, c, 0, 0);
      Scalar* op = out.data() + out.offset(n, c, 0, 0);
      for (Index oh = 0; oh < oh_n; ++oh) {
        for (Index ow = 0; ow < ow_n; ++ow) {
          for (int fh = 0; fh < factor; ++fh) {
            rows[static_cast<std::size_t>(fh)] =
                pairwise_sum(ip + (oh * factor + fh) * d.w + ow * factor, factor);
          }
          op[oh * ow_n + ow] = pairwise_sum(rows.data(), factor) * inv;
        }
      }
    }
  }
  maybe_record({x, out}, [=]() mutable {
    const Dims& dd = x.dims();
    const Index ohn = dd.h / factor, own = dd.w / factor;
    const Scalar s = 1.0 / (static_cast<Scalar>(factor) * static_cast<Scalar>(factor));
    for (Index n = 0; n < dd.n; ++n) {
      for (Index c = 0; c < dd.c; ++c) {
        Scalar* gip = x.grad() + x.offset(n, c, 0, 0);
        const Scalar* gop = out.grad() + out.offset(n, c, 0, 0);
        for (Index oh = 0; oh < ohn; ++oh) {
          for (Index ow = 0; ow < own; ++ow) {
            const Scalar g = gop[oh * own + ow] * s;
            for (int fh = 0; fh < factor; ++fh) {
              VecMap(gip + (oh * factor + fh) * dd.w + ow * factor, factor).array() += g;
            }
          }
        }
      }
    }
  });
  return out;
}

Tensor concat_channels(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat_channels: no inputs");
  const Dims& d0 = xs.front().dims();
  Index c_total = 0;
  for (const Tensor& x : xs) {
    const Dims& d = x.dims();
    if (d.n != d0.n || d.h != d0.h || d.w != d0.w) {
      throw ShapeError("concat_channels: spatial/batch axes must agree, got " + to_string(d) +
                       " vs " + to_string(d0));
    }
    c_total += d.c;
  }
  Tensor out(d0.n, c_total, d0.h, d0.w);
  const Index plane = d0.h * d0.w;
  for (Index n = 0; n < d0.n; ++n) {
    Index c_off = 0;
    for (const Tensor& x : xs) {
      const Index block = x.dims().c * plane;
      VecMap(out.data() + out.offset(n, c_off, 0, 0), block) =
          ConstVecMap(x.data() + x.offset(n, 0, 0, 0), block);
      c_off += x.dims().c;
    }
  }
  std::vector<Tensor> rec = xs;
  rec.push_back(out);
  maybe_record(std::move(rec), [xs, out]() mutable {
    const Dims& d = out.dims();
    const Index plane = d.h * d.w;
    for (Index n = 0; n < d.n; ++n) {
      Index c_off = 0;
      for (Tensor& x : const_cast<std::vector<Tensor>&>(xs)) {
        const Index block = x.dims().c * plane;
        VecMap(x.grad() + x.offset(n, 0, 0, 0), block) +=
            ConstVecMap(out.grad() + out.offset(n, c_off, 0, 0), block);
        c_off += x.dims().c;
      }
    }
  });
  return out;
}

std::vector<Tensor> split_channels(const Tensor& x, const std::vector<Index>& sizes) {
  const Dims& d = x.dims();
  const Index total = std::accumulate(sizes.begin(), sizes.end(), Index{0});
  if (total != d.c) {
    throw ShapeError("split_channels: sizes sum to " + std::to_string(total) +
                     " but channel axis has " + std::to_string(d.c));
  }
  for (Index s : sizes) {
    if (s <= 0) throw ShapeError("split_channels: sizes must be positive");
  }
  std::vector<Tensor> outs;
  outs.reserve(sizes.size());
  const Index plane = d.h * d.w;
  Index c_off = 0;
  for (Index s : sizes) {
    Tensor part(d.n, s, d.h, d.w);
    for (Index n = 0; n < d.n; ++n) {
      VecMap(part.data() + part.offset(n, 0, 0, 0), s * plane) =
          ConstVecMap(x.data() + x.offset(n, c_off, 0, 0), s * plane);
    }
    outs.push_back(part);
    c_off += s;
  }
  std::vector<Tensor> rec = outs;
  rec.push_back(x);
  maybe_record(std::move(rec), [x, outs, sizes]() mutable {
    const Dims& d = x.dims();
    const Index plane = d.h * d.w;
    Index c_off = 0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const Index s = sizes[i];
      for (Index n = 0; n < d.n; ++n) {
        VecMap(x.grad() + x.offset(n, c_off, 0, 0), s * plane) +=
            ConstVecMap(outs[i].grad() + outs[i].offset(n, 0, 0, 0), s * plane);
      }
      c_off += s;
    }
  });
  return outs;
}

Tensor permute_channels(const Tensor& x, const std::vector<Index>& perm) {
  const Dims& d = x.dims();
  if (static_cast<Index>(perm.size()) != d.c) {
    throw ShapeError("permute_channels: permutation length " + std::to_string(perm.size()) +
                     " does not match channel axis " + std::to_string(d.c));
  }
  std::vector<bool> hit(perm.size(), false);
  for (Index p : perm) {
    if (p < 0 || p >= d.c || hit[static_cast<std::size_t>(p)]) {
      throw ShapeError("permute_channels: not a bijection on the channel axis");
    }
    hit[static_cast<std::size_t>(p)] = true;
  }
  Tensor out(d);
  const Index plane = d.h * d.w;
  for (Index n = 0; n < d.n; ++n) {
    for (Index c = 0; c < d.c; ++c) {
      VecMap(out.data() + out.offset(n, c, 0, 0), plane) =
          ConstVecMap(x.data() + x.offset(n, perm[static_cast<std::size_t>(c)], 0, 0), plane);
    }
  }
  maybe_record({x, out}, [=]() mutable {
    const Dims& dd = x.dims();
    const Index pl = dd.h * dd.w;
    for (Index n = 0; n < dd.n; ++n) {
      for (Index c = 0; c < dd.c; ++c) {
        VecMap(x.grad() + x.offset(n, perm[static_cast<std::size_t>(c)], 0, 0), pl) +=
            ConstVecMap(out.grad() + out.offset(n, c, 0, 0), pl);
      }
    }
  });
  return out;
}

namespace {

enum class Bcast { kFull, kPerChannel, kPerPosition };

Bcast resolve_broadcast(const char* op, const Dims& a, const Dims& b) {
  if (a == b) return Bcast::kFull;
  if (b.n == a.n && b.c == a.c && b.h == 1 && b.w == 1) return Bcast::kPerChannel;
  if (b.n == a.n && b.c == 1 && b.h == a.h && b.w == a.w) return Bcast::kPerPosition;
  throw ShapeError(std::string(op) + ": second operand " + to_string(b) +
                   " does not broadcast over " + to_string(a) +
                   " (expected equal dims, (n,c,1,1) or (n,1,h,w))");
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const Bcast mode = resolve_broadcast("add", a.dims(), b.dims());
  const Dims& d = a.dims();
  Tensor out(d);
  const Index plane = d.h * d.w;
  switch (mode) {
    case Bcast::kFull:
      out.array() = a.array() + b.array();
      break;
    case Bcast::kPerChannel:
      for (Index n = 0; n < d.n; ++n) {
        for (Index c = 0; c < d.c; ++c) {
          VecMap(out.data() + out.offset(n, c, 0, 0), plane).array() =
              ConstVecMap(a.data() + a.offset(n, c, 0, 0), plane).array() +
              b.data()[b.offset(n, c, 0, 0)];
        }
      }
      break;
    case Bcast::kPerPosition:
      for (Index n = 0; n < d.n; ++n) {
        for (Index c = 0; c < d.c; ++c) {
          VecMap(out.data() + out.offset(n, c, 0, 0), plane) =
              ConstVecMap(a.data() + a.offset(n, c, 0, 0), plane) +
              ConstVecMap(b.data() + b.offset(n, 0, 0, 0), plane);
        }
      }
      break;
  }
  maybe_record({a, b, out}, [=]() mutable {
    const Dims& dd = a.dims();
    const Index pl = dd.h * dd.w;
    a.grad_array() += out.grad_array();
    switch (mode) {
      case Bcast::kFull:
        b.grad_array() += out.grad_array();
        break;
      case Bcast::kPerChannel:
        for (Index n = 0; n < dd.n; ++n) {
          for (Index c = 0; c < dd.c; ++c) {
            b.grad()[b.offset(n, c, 0, 0)] +=
                ConstVecMap(out.grad() + out.offset(n, c, 0, 0), pl).sum();
          }
        }
        break;
      case Bcast::kPerPosition:
        for (Index n = 0; n < dd.n; ++n) {
          for (Index c = 0; c < dd.c; ++c) {
            VecMap(b.grad() + b.offset(n, 0, 0, 0), pl) +=
                ConstVecMap(out.grad() + out.offset(n, c, 0, 0), pl);
          }
        }
        break;
    }
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const Bcast mode = resolve_broadcast("mul", a.dims(), b.dims());
  const Dims& d = a.dims();
  Tensor out(d);
  const Index plane = d.h * d.w;
  switch (mode) {
    case Bcast::kFull:
      out.array() = a.array() * b.array();
      break;
    case Bcast::kPerChannel:
      for (Index n = 0; n < d.n; ++n) {
        for (Index c = 0; c < d.c; ++c) {
          VecMap(out.data() + out.offset(n, c, 0, 0), plane) =
              ConstVecMap(a.data() + a.offset(n, c, 0, 0), plane) *
              b.data()[b.offset(n, c, 0, 0)];
        }
      }
      break;
    case Bcast::kPerPosition:
      for (Index n = 0; n < d.n; ++n) {
        for (Index c = 0; c < d.c; ++c) {
          VecMap(out.data() + out.offset(n, c, 0, 0), plane).array() =
              ConstVecMap(a.data() + a.offset(n, c, 0, 0), plane).array() *
              ConstVecMap(b.data() + b.offset(n, 0, 0, 0), plane).array();
        }
      }
      break;
  }
  maybe_record({a, b, out}, [=]() mutable {
    const Dims& dd = a.dims();
    const Index pl = dd.h * dd.w;
    switch (mode) {
      case Bcast::kFull:
        a.grad_array() += b.array() * out.grad_array();
        b.grad_array() += a.array() * out.grad_array();
        break;
      case Bcast::kPerChannel:
        for (Index n = 0; n < dd.n; ++n) {
          for (Index c = 0; c < dd.c; ++c) {
            const Scalar bv = b.data()[b.offset(n, c, 0, 0)];
            VecMap(a.grad() + a.offset(n, c, 0, 0), pl) +=
                bv * ConstVecMap(out.grad() + out.offset(n, c, 0, 0), pl);
            b.grad()[b.offset(n, c, 0, 0)] +=
                ConstVecMap(out.grad() + out.offset(n, c, 0, 0), pl)
                    .dot(ConstVecMap(a.data() + a.offset(n, c, 0, 0), pl));
          }
        }
        break;
      case Bcast::kPerPosition:
        for (Index n = 0; n < dd.n; ++n) {
          for (Index c = 0; c < dd.c; ++c) {
            VecMap(a.grad() + a.offset(n, c, 0, 0), pl).array() +=
                ConstVecMap(b.data() + b.offset(n, 0, 0, 0), pl).array() *
                ConstVecMap(out.grad() + out.offset(n, c, 0, 0), pl).array();
            VecMap(b.grad() + b.offset(n, 0, 0, 0), pl).array() +=
                ConstVecMap(a.data() + a.offset(n, c, 0, 0), pl).array() *
                ConstVecMap(out.grad() + out.offset(n, c, 0, 0), pl).array();
          }
        }
        break;
    }
  });
  return out;
}

Tensor scale(const Tensor& x, Scalar k) {
  Tensor out(x.dims());
  out.array() = k * x.array();
  maybe_record({x, out}, [=]() mutable { x.grad_array() += k * out.grad_array(); });
  return out;
}

Tensor sum(const Tensor& x) {
  Tensor out(1, 1, 1, 1);
  out.data()[0] = x.array().sum();
  maybe_record({x, out}, [=]() mutable { x.grad_array() += out.grad()[0]; });
  return out;
}

}  // namespace shufflepose::ops
