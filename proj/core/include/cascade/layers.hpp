// Copyright 2026 The Cascade Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "cascade/ops.hpp"

namespace cascade {

template <class S>
struct NamedParam {
  std::string name;
  Tensor<S> tensor;
};

template <class S>
using ParamList = std::vector<NamedParam<S>>;

inline constexpr double kInitRange = 0.05;
inline constexpr double kForgetGateBias = 1.0;
inline constexpr double kLayerNormEps = 1e-5;

// ---------------------------------------------------------------------------
// Embedding

struct EmbeddingSpec {
  int vocab_size = 0;
  int dim = 0;
};

template <class S>
struct Embedding {
  EmbeddingSpec spec;
  Tensor<S> table;  // [vocab x dim]

  static Embedding init(EmbeddingSpec spec, Rng& rng) {
    if (spec.vocab_size < 1 || spec.dim < 1) {
      throw ArgumentError("embedding: vocab_size and dim must be positive");
    }
    Embedding e;
    e.spec = spec;
    e.table = Tensor<S>::uniform_param({spec.vocab_size, spec.dim}, rng,
                                       -kInitRange, kInitRange);
    return e;
  }

  // Row i of the result is the table row for ids[i].
  Tensor<S> forward(const std::vector<int>& ids) const {
    return gather_rows(table, ids);
  }

  void collect(const std::string& prefix, ParamList<S>& out) const {
    out.push_back({prefix + ".table", table});
  }
};

// ---------------------------------------------------------------------------
// 1-D convolution over [T x C] sequences

enum class PaddingMode { kCausal, kCentered };

struct Conv1dSpec {
  int kernel_size = 3;
  int stride = 1;
  int dilation = 1;
  int in_channels = 0;
  int out_channels = 0;
  PaddingMode padding = PaddingMode::kCausal;
};

// Both padding modes keep output length at ceil(input_length / stride).
inline int conv_output_length(int input_length, int stride) {
  return input_length == 0 ? 0 : (input_length + stride - 1) / stride;
}

inline int conv_pad_left(const Conv1dSpec& s) {
  if (s.padding == PaddingMode::kCausal) {
    return (s.kernel_size - 1) * s.dilation;
  }
  // Center offset such that lookahead is floor((k-1)/2) * dilation.
  return ((s.kernel_size + 0) / 2) * s.dilation;
}

// Frames of future context consumed per output position.
inline int conv_lookahead(const Conv1dSpec& s) {
  if (s.padding == PaddingMode::kCausal) return 0;
  return ((s.kernel_size - 1) / 2) * s.dilation;
}

template <class S>
struct Conv1d {
  Conv1dSpec spec;
  Tensor<S> weight;  // [(kernel * in_channels) x out_channels]
  Tensor<S> bias;    // [1 x out_channels]

  static Conv1d init(Conv1dSpec spec, Rng& rng) {
    if (spec.kernel_size < 1 || spec.stride < 1 || spec.dilation < 1 ||
        spec.in_channels < 1 || spec.out_channels < 1) {
      throw ArgumentError("conv1d: spec fields must be positive");
    }
    Conv1d c;
    c.spec = spec;
    c.weight = Tensor<S>::uniform_param(
        {spec.kernel_size * spec.in_channels, spec.out_channels}, rng,
        -kInitRange, kInitRange);
    c.bias = Tensor<S>::uniform_param({1, spec.out_channels}, rng, -kInitRange,
                                      kInitRange);
    return c;
  }

  Tensor<S> forward(const Tensor<S>& x) const {
    if (x.rank() != 2 || x.dim(1) != spec.in_channels) {
      throw ShapeError("conv1d: input " + shape_str(x.shape()) + " expected " +
                       std::to_string(spec.in_channels) + " channels");
    }
    auto patches = im2col(x, spec.kernel_size, spec.stride, spec.dilation,
                          conv_pad_left(spec));
    return add_rowvec(matmul(patches, weight), bias);
  }

  void collect(const std::string& prefix, ParamList<S>& out) const {
    out.push_back({prefix + ".weight", weight});
    out.push_back({prefix + ".bias", bias});
  }
};

// Rolling input buffer for step-wise evaluation of a causal stride-1 conv.
// Produces outputs identical to whole-sequence forward().
template <class S>
struct Conv1dStream {
  const Conv1d<S>* layer = nullptr;
  std::vector<S> history;  // (kernel-1)*dilation + 1 rows, oldest first

  explicit Conv1dStream(const Conv1d<S>& l) : layer(&l) {
    if (l.spec.padding != PaddingMode::kCausal || l.spec.stride != 1) {
      throw CapabilityError("streaming conv requires causal padding, stride 1");
    }
    history.assign(static_cast<size_t>(window()) * l.spec.in_channels, S(0));
  }

  int window() const {
    return (layer->spec.kernel_size - 1) * layer->spec.dilation + 1;
  }

  Tensor<S> push(const Tensor<S>& row) {
    const int c = layer->spec.in_channels;
    if (row.rank() != 2 || row.dim(0) != 1 || row.dim(1) != c) {
      throw ShapeError("conv stream: expected [1 x " + std::to_string(c) +
                       "] row, got " + shape_str(row.shape()));
    }
    const int w = window();
    std::copy(history.begin() + c, history.end(), history.begin());
    std::copy(row.data().begin(), row.data().end(),
              history.end() - static_cast<std::ptrdiff_t>(c));
    // Window rows oldest..newest == taps 0..kernel-1 spaced by dilation,
    // matching im2col at t' = current position.
    const int k = layer->spec.kernel_size;
    const int d = layer->spec.dilation;
    std::vector<S> taps(static_cast<size_t>(k) * c);
    for (int j = 0; j < k; ++j) {
      const int r = w - 1 - (k - 1 - j) * d;
      std::copy(history.begin() + static_cast<size_t>(r) * c,
                history.begin() + static_cast<size_t>(r + 1) * c,
                taps.begin() + static_cast<size_t>(j) * c);
    }
    auto patch = Tensor<S>::from({1, k * c}, std::move(taps));
    return add_rowvec(matmul(patch, layer->weight), layer->bias);
  }
};

// ---------------------------------------------------------------------------
// Layer normalization (per final-axis slice, affine)

template <class S>
Tensor<S> layer_norm_op(const Tensor<S>& x, const Tensor<S>& gain,
                        const Tensor<S>& bias, double eps = kLayerNormEps) {
  if (x.rank() != 2) {
    throw ShapeError("layer_norm: expected 2-D input, got " +
                     shape_str(x.shape()));
  }
  const int r = x.dim(0), c = x.dim(1);
  if (c < 2) throw ShapeError("layer_norm: final dimension must be >= 2");
  if (static_cast<int>(gain.numel()) != c ||
      static_cast<int>(bias.numel()) != c) {
    throw ShapeError("layer_norm: parameter width mismatch");
  }
  std::vector<S> out(x.numel());
  std::vector<S> xhat(x.numel());
  std::vector<S> rstd(static_cast<size_t>(r));
  const auto& xv = x.data();
  const auto& gv = gain.data();
  const auto& bv = bias.data();
  for (int i = 0; i < r; ++i) {
    const S* row = xv.data() + static_cast<size_t>(i) * c;
    S mean = S(0);
    for (int j = 0; j < c; ++j) mean += row[j];
    mean /= static_cast<S>(c);
    S var = S(0);
    for (int j = 0; j < c; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<S>(c);
    const S rs = S(1) / std::sqrt(var + static_cast<S>(eps));
    rstd[static_cast<size_t>(i)] = rs;
    for (int j = 0; j < c; ++j) {
      const S xh = (row[j] - mean) * rs;
      xhat[static_cast<size_t>(i) * c + j] = xh;
      out[static_cast<size_t>(i) * c + j] = xh * gv[j] + bv[j];
    }
  }
  auto xn = x.node();
  auto gn = gain.node();
  auto bn = bias.node();
  int R = r, C = c;
  return make_op<S>(
      x.shape(), std::move(out), {xn, gn, bn},
      [xn, gn, bn, xhat = std::move(xhat), rstd = std::move(rstd), R,
       C](const std::vector<S>& g, GradMap<S>& gm) {
        for (int i = 0; i < R; ++i) {
          const S* grow = g.data() + static_cast<size_t>(i) * C;
          const S* xh = xhat.data() + static_cast<size_t>(i) * C;
          if (gn->requires_grad) {
            auto& dg = gm.get(gn.get());
            for (int j = 0; j < C; ++j) dg[j] += grow[j] * xh[j];
          }
          if (bn->requires_grad) {
            auto& db = gm.get(bn.get());
            for (int j = 0; j < C; ++j) db[j] += grow[j];
          }
          if (xn->requires_grad) {
            auto& dx = gm.get(xn.get());
            const auto& gv = gn->value;
            S sum_dxhat = S(0), sum_dxhat_xhat = S(0);
            for (int j = 0; j < C; ++j) {
              const S dxh = grow[j] * gv[j];
              sum_dxhat += dxh;
              sum_dxhat_xhat += dxh * xh[j];
            }
            const S inv_c = S(1) / static_cast<S>(C);
            const S rs = rstd[static_cast<size_t>(i)];
            for (int j = 0; j < C; ++j) {
              const S dxh = grow[j] * gv[j];
              dx[static_cast<size_t>(i) * C + j] +=
                  rs * (dxh - sum_dxhat * inv_c - xh[j] * sum_dxhat_xhat * inv_c);
            }
          }
        }
      });
}

template <class S>
struct LayerNorm {
  Tensor<S> gain;  // [1 x d], ones
  Tensor<S> bias;  // [1 x d], zeros

  static LayerNorm init(int d) {
    LayerNorm ln;
    ln.gain = Tensor<S>::param({1, d}, std::vector<S>(static_cast<size_t>(d), S(1)));
    ln.bias = Tensor<S>::param({1, d}, std::vector<S>(static_cast<size_t>(d), S(0)));
    return ln;
  }

  Tensor<S> forward(const Tensor<S>& x) const {
    return layer_norm_op(x, gain, bias);
  }

  void collect(const std::string& prefix, ParamList<S>& out) const {
    out.push_back({prefix + ".gain", gain});
    out.push_back({prefix + ".bias", bias});
  }
};

// ---------------------------------------------------------------------------
// Fully connected

template <class S>
struct Dense {
  Tensor<S> weight;  // [in x out]
  Tensor<S> bias;    // [1 x out]

  static Dense init(int in, int out, Rng& rng) {
    Dense d;
    d.weight =
        Tensor<S>::uniform_param({in, out}, rng, -kInitRange, kInitRange);
    d.bias = Tensor<S>::uniform_param({1, out}, rng, -kInitRange, kInitRange);
    return d;
  }

  Tensor<S> forward(const Tensor<S>& x) const {
    return add_rowvec(matmul(x, weight), bias);
  }

  void collect(const std::string& prefix, ParamList<S>& out) const {
    out.push_back({prefix + ".weight", weight});
    out.push_back({prefix + ".bias", bias});
  }
};

// ---------------------------------------------------------------------------
// LSTM with optional output projection

struct RecurrentSpec {
  int layers = 1;
  int hidden_units = 0;
  int projection_units = 0;  // 0: no projection, outputs hidden_units
};

template <class S>
struct LstmLayer {
  int in = 0, hidden = 0, proj = 0;  // proj == 0 means no projection
  Tensor<S> wx;     // [in x 4H], gate order i f g o
  Tensor<S> wh;     // [out_dim x 4H]
  Tensor<S> b;      // [1 x 4H], forget slice starts at H
  Tensor<S> wproj;  // [H x proj] when proj > 0

  int out_dim() const { return proj > 0 ? proj : hidden; }

  static LstmLayer init(int in, int hidden, int proj, Rng& rng) {
    LstmLayer l;
    l.in = in;
    l.hidden = hidden;
    l.proj = proj;
    const int od = l.out_dim();
    l.wx = Tensor<S>::uniform_param({in, 4 * hidden}, rng, -kInitRange,
                                    kInitRange);
    l.wh = Tensor<S>::uniform_param({od, 4 * hidden}, rng, -kInitRange,
                                    kInitRange);
    std::vector<S> bias(static_cast<size_t>(4 * hidden));
    for (int j = 0; j < 4 * hidden; ++j) {
      bias[static_cast<size_t>(j)] =
          (j >= hidden && j < 2 * hidden)
              ? static_cast<S>(kForgetGateBias)
              : static_cast<S>(rng.uniform(-kInitRange, kInitRange));
    }
    l.b = Tensor<S>::param({1, 4 * hidden}, std::move(bias));
    if (proj > 0) {
      l.wproj = Tensor<S>::uniform_param({hidden, proj}, rng, -kInitRange,
                                         kInitRange);
    }
    return l;
  }

  struct State {
    Tensor<S> h;  // [1 x out_dim]
    Tensor<S> c;  // [1 x hidden]
  };

  State zero_state() const {
    return {Tensor<S>::zeros({1, out_dim()}), Tensor<S>::zeros({1, hidden})};
  }

  void check_state(const State& s) const {
    if (s.h.rank() != 2 || s.h.dim(0) != 1 || s.h.dim(1) != out_dim() ||
        s.c.rank() != 2 || s.c.dim(0) != 1 || s.c.dim(1) != hidden) {
      throw StateError("recurrent state shape mismatch: h " +
                       shape_str(s.h.shape()) + ", c " + shape_str(s.c.shape()) +
                       " for hidden " + std::to_string(hidden) + " proj " +
                       std::to_string(proj));
    }
  }

  // One step given the precomputed input projection x * wx ([1 x 4H]).
  std::pair<Tensor<S>, State> step_preproj(const Tensor<S>& xproj,
                                           const State& state) const {
    check_state(state);
    auto gates = add_rowvec(add(xproj, matmul(state.h, wh)), b);
    auto i = sigmoid(slice_cols(gates, 0, hidden));
    auto f = sigmoid(slice_cols(gates, hidden, 2 * hidden));
    auto g = tanh_op(slice_cols(gates, 2 * hidden, 3 * hidden));
    auto o = sigmoid(slice_cols(gates, 3 * hidden, 4 * hidden));
    auto c_new = add(mul(f, state.c), mul(i, g));
    auto h_cell = mul(o, tanh_op(c_new));
    Tensor<S> y = proj > 0 ? matmul(h_cell, wproj) : h_cell;
    return {y, State{y, c_new}};
  }

  std::pair<Tensor<S>, State> step(const Tensor<S>& x,
                                   const State& state) const {
    if (x.rank() != 2 || x.dim(0) != 1 || x.dim(1) != in) {
      throw ShapeError("lstm step: input " + shape_str(x.shape()) +
                       " expected 1x" + std::to_string(in));
    }
    return step_preproj(matmul(x, wx), state);
  }

  void collect(const std::string& prefix, ParamList<S>& out) const {
    out.push_back({prefix + ".wx", wx});
    out.push_back({prefix + ".wh", wh});
    out.push_back({prefix + ".b", b});
    if (proj > 0) out.push_back({prefix + ".wproj", wproj});
  }
};

// Stack of LSTM layers, each optionally followed by layer normalization.
template <class S>
struct LstmStack {
  RecurrentSpec spec;
  std::vector<LstmLayer<S>> layers;
  std::vector<LayerNorm<S>> norms;  // empty when disabled
  bool use_layer_norm = true;

  static LstmStack init(int in, const RecurrentSpec& spec, bool layer_norm,
                        Rng& rng) {
    if (spec.layers < 1 || spec.hidden_units < 1 ||
        spec.projection_units < 0) {
      throw ArgumentError("recurrent spec fields must be positive");
    }
    LstmStack s;
    s.spec = spec;
    s.use_layer_norm = layer_norm;
    int d = in;
    for (int l = 0; l < spec.layers; ++l) {
      s.layers.push_back(LstmLayer<S>::init(d, spec.hidden_units,
                                            spec.projection_units, rng));
      d = s.layers.back().out_dim();
      if (layer_norm) s.norms.push_back(LayerNorm<S>::init(d));
    }
    return s;
  }

  int out_dim() const { return layers.back().out_dim(); }

  using State = std::vector<typename LstmLayer<S>::State>;

  State zero_state() const {
    State st;
    for (const auto& l : layers) st.push_back(l.zero_state());
    return st;
  }

  std::pair<Tensor<S>, State> step(const Tensor<S>& x, const State& state) const {
    if (state.size() != layers.size()) {
      throw StateError("recurrent stack state has " +
                       std::to_string(state.size()) + " layers, expected " +
                       std::to_string(layers.size()));
    }
    Tensor<S> cur = x;
    State next;
    next.reserve(layers.size());
    for (size_t l = 0; l < layers.size(); ++l) {
      auto [y, st] = layers[l].step(cur, state[l]);
      next.push_back(std::move(st));
      cur = use_layer_norm ? norms[l].forward(y) : y;
    }
    return {cur, std::move(next)};
  }

  // Whole-sequence forward from the zero state; [T x in] -> [T x out_dim].
  Tensor<S> forward_seq(const Tensor<S>& x) const {
    if (x.rank() != 2) {
      throw ShapeError("lstm forward_seq: expected 2-D input");
    }
    const int t_len = x.dim(0);
    if (t_len == 0) return Tensor<S>::zeros({0, out_dim()});
    Tensor<S> cur = x;
    for (size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      auto xproj = matmul(cur, layer.wx);  // [T x 4H] in one pass
      auto state = layer.zero_state();
      std::vector<Tensor<S>> outs;
      outs.reserve(static_cast<size_t>(t_len));
      for (int t = 0; t < t_len; ++t) {
        auto [y, st] = layer.step_preproj(slice_rows(xproj, t, t + 1), state);
        state = std::move(st);
        outs.push_back(std::move(y));
      }
      cur = concat(outs, 0);
      if (use_layer_norm) cur = norms[l].forward(cur);
    }
    return cur;
  }

  void collect(const std::string& prefix, ParamList<S>& out) const {
    for (size_t l = 0; l < layers.size(); ++l) {
      layers[l].collect(prefix + ".lstm" + std::to_string(l), out);
      if (use_layer_norm) {
        norms[l].collect(prefix + ".norm" + std::to_string(l), out);
      }
    }
  }
};

}  // namespace cascade
