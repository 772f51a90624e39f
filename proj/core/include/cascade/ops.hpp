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

#include <algorithm>
#include <cmath>

#include "cascade/tensor.hpp"

namespace cascade {

// Primitive differentiable ops over 1-D/2-D row-major tensors. Every op here
// is checked against central finite differences in the test suite; when
// adding one, add it to the gradient property test as well.

namespace detail {

template <class S>
inline void check_2d(const Tensor<S>& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected 2-D tensor, got " +
                     shape_str(t.shape()));
  }
}

template <class S>
inline std::pair<int, int> rows_cols(const Tensor<S>& t, const char* op) {
  check_2d(t, op);
  return {t.dim(0), t.dim(1)};
}

}  // namespace detail

// C[m x n] = A[m x k] * B[k x n]
template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  auto [m, k] = detail::rows_cols(a, "matmul");
  auto [k2, n] = detail::rows_cols(b, "matmul");
  if (k != k2) {
    throw ShapeError("matmul: inner dimensions disagree, " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  std::vector<S> out(static_cast<size_t>(m) * n, S(0));
  const auto& av = a.data();
  const auto& bv = b.data();
  for (int i = 0; i < m; ++i) {
    const S* arow = av.data() + static_cast<size_t>(i) * k;
    S* crow = out.data() + static_cast<size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const S aik = arow[kk];
      if (aik == S(0)) continue;
      const S* brow = bv.data() + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  auto an = a.node();
  auto bn = b.node();
  int M = m, K = k, N = n;
  return make_op<S>(
      {m, n}, std::move(out), {an, bn},
      [an, bn, M, K, N](const std::vector<S>& g, GradMap<S>& gm) {
        if (an->requires_grad) {
          auto& da = gm.get(an.get());
          const auto& bv = bn->value;
          // dA = g * B^T
          for (int i = 0; i < M; ++i) {
            const S* grow = g.data() + static_cast<size_t>(i) * N;
            S* darow = da.data() + static_cast<size_t>(i) * K;
            for (int kk = 0; kk < K; ++kk) {
              const S* brow = bv.data() + static_cast<size_t>(kk) * N;
              S acc = S(0);
              for (int j = 0; j < N; ++j) acc += grow[j] * brow[j];
              darow[kk] += acc;
            }
          }
        }
        if (bn->requires_grad) {
          auto& db = gm.get(bn.get());
          const auto& av = an->value;
          // dB = A^T * g
          for (int i = 0; i < M; ++i) {
            const S* arow = av.data() + static_cast<size_t>(i) * K;
            const S* grow = g.data() + static_cast<size_t>(i) * N;
            for (int kk = 0; kk < K; ++kk) {
              const S aik = arow[kk];
              if (aik == S(0)) continue;
              S* dbrow = db.data() + static_cast<size_t>(kk) * N;
              for (int j = 0; j < N; ++j) dbrow[j] += aik * grow[j];
            }
          }
        }
      });
}

template <class S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: shape mismatch, " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  std::vector<S> out(a.data());
  const auto& bv = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  auto an = a.node();
  auto bn = b.node();
  return make_op<S>(a.shape(), std::move(out), {an, bn},
                    [an, bn](const std::vector<S>& g, GradMap<S>& gm) {
                      if (an->requires_grad) {
                        auto& da = gm.get(an.get());
                        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
                      }
                      if (bn->requires_grad) {
                        auto& db = gm.get(bn.get());
                        for (size_t i = 0; i < g.size(); ++i) db[i] += g[i];
                      }
                    });
}

// m[R x C] + v broadcast over rows (v is [C] or [1 x C]).
template <class S>
Tensor<S> add_rowvec(const Tensor<S>& m, const Tensor<S>& v) {
  auto [r, c] = detail::rows_cols(m, "add_rowvec");
  if (static_cast<int>(v.numel()) != c) {
    throw ShapeError("add_rowvec: vector length " + shape_str(v.shape()) +
                     " vs columns " + std::to_string(c));
  }
  std::vector<S> out(m.data());
  const auto& vv = v.data();
  for (int i = 0; i < r; ++i) {
    S* row = out.data() + static_cast<size_t>(i) * c;
    for (int j = 0; j < c; ++j) row[j] += vv[j];
  }
  auto mn = m.node();
  auto vn = v.node();
  int R = r, C = c;
  return make_op<S>(m.shape(), std::move(out), {mn, vn},
                    [mn, vn, R, C](const std::vector<S>& g, GradMap<S>& gm) {
                      if (mn->requires_grad) {
                        auto& dm = gm.get(mn.get());
                        for (size_t i = 0; i < g.size(); ++i) dm[i] += g[i];
                      }
                      if (vn->requires_grad) {
                        auto& dv = gm.get(vn.get());
                        for (int i = 0; i < R; ++i) {
                          const S* grow = g.data() + static_cast<size_t>(i) * C;
                          for (int j = 0; j < C; ++j) dv[j] += grow[j];
                        }
                      }
                    });
}

template <class S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mul: shape mismatch, " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  std::vector<S> out(a.numel());
  const auto& av = a.data();
  const auto& bv = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  auto an = a.node();
  auto bn = b.node();
  return make_op<S>(a.shape(), std::move(out), {an, bn},
                    [an, bn](const std::vector<S>& g, GradMap<S>& gm) {
                      if (an->requires_grad) {
                        auto& da = gm.get(an.get());
                        for (size_t i = 0; i < g.size(); ++i)
                          da[i] += g[i] * bn->value[i];
                      }
                      if (bn->requires_grad) {
                        auto& db = gm.get(bn.get());
                        for (size_t i = 0; i < g.size(); ++i)
                          db[i] += g[i] * an->value[i];
                      }
                    });
}

template <class S>
Tensor<S> scale(const Tensor<S>& a, S factor) {
  std::vector<S> out(a.data());
  for (auto& x : out) x *= factor;
  auto an = a.node();
  return make_op<S>(a.shape(), std::move(out), {an},
                    [an, factor](const std::vector<S>& g, GradMap<S>& gm) {
                      if (!an->requires_grad) return;
                      auto& da = gm.get(an.get());
                      for (size_t i = 0; i < g.size(); ++i)
                        da[i] += g[i] * factor;
                    });
}

template <class S>
Tensor<S> tanh_op(const Tensor<S>& a) {
  std::vector<S> out(a.numel());
  const auto& av = a.data();
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = std::tanh(av[i]);
  auto an = a.node();
  auto keep = out;  // y, for dy/dx = 1 - y^2
  return make_op<S>(a.shape(), std::move(out), {an},
                    [an, keep = std::move(keep)](const std::vector<S>& g,
                                                 GradMap<S>& gm) {
                      if (!an->requires_grad) return;
                      auto& da = gm.get(an.get());
                      for (size_t i = 0; i < g.size(); ++i)
                        da[i] += g[i] * (S(1) - keep[i] * keep[i]);
                    });
}

template <class S>
Tensor<S> sigmoid(const Tensor<S>& a) {
  std::vector<S> out(a.numel());
  const auto& av = a.data();
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = S(1) / (S(1) + std::exp(-av[i]));
  auto an = a.node();
  auto keep = out;
  return make_op<S>(a.shape(), std::move(out), {an},
                    [an, keep = std::move(keep)](const std::vector<S>& g,
                                                 GradMap<S>& gm) {
                      if (!an->requires_grad) return;
                      auto& da = gm.get(an.get());
                      for (size_t i = 0; i < g.size(); ++i)
                        da[i] += g[i] * keep[i] * (S(1) - keep[i]);
                    });
}

// Concatenate along axis 0 (rows) or 1 (columns). All inputs are 2-D with
// matching other-axis extents.
template <class S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts, int axis) {
  if (parts.empty()) throw ArgumentError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ArgumentError("concat: axis must be 0 or 1");
  const int other = axis == 0 ? 1 : 0;
  detail::check_2d(parts[0], "concat");
  const int fixed = parts[0].dim(other);
  int total = 0;
  for (const auto& p : parts) {
    detail::check_2d(p, "concat");
    if (p.dim(other) != fixed) {
      throw ShapeError("concat: mismatched shape " + shape_str(p.shape()));
    }
    total += p.dim(axis);
  }
  std::vector<int> shape = axis == 0 ? std::vector<int>{total, fixed}
                                     : std::vector<int>{fixed, total};
  std::vector<S> out(static_cast<size_t>(total) * fixed);
  std::vector<NodePtr<S>> parents;
  parents.reserve(parts.size());
  std::vector<int> extents;
  for (const auto& p : parts) {
    parents.push_back(p.node());
    extents.push_back(p.dim(axis));
  }
  if (axis == 0) {
    size_t off = 0;
    for (const auto& p : parts) {
      const auto& pv = p.data();
      std::copy(pv.begin(), pv.end(), out.begin() + off);
      off += pv.size();
    }
  } else {
    int coff = 0;
    for (const auto& p : parts) {
      const auto& pv = p.data();
      const int pc = p.dim(1);
      for (int i = 0; i < fixed; ++i) {
        std::copy(pv.begin() + static_cast<size_t>(i) * pc,
                  pv.begin() + static_cast<size_t>(i + 1) * pc,
                  out.begin() + static_cast<size_t>(i) * total + coff);
      }
      coff += pc;
    }
  }
  auto parents_copy = parents;
  const int total_cols = shape[1];
  const int fixed_rows = fixed;
  return make_op<S>(
      std::move(shape), std::move(out), std::move(parents),
      [parents_copy = std::move(parents_copy), extents = std::move(extents),
       axis, total_cols,
       fixed_rows](const std::vector<S>& g, GradMap<S>& gm) {
        if (axis == 0) {
          size_t off = 0;
          for (size_t p = 0; p < parents_copy.size(); ++p) {
            const auto& pn = parents_copy[p];
            const size_t n = pn->numel();
            if (pn->requires_grad) {
              auto& dp = gm.get(pn.get());
              for (size_t i = 0; i < n; ++i) dp[i] += g[off + i];
            }
            off += n;
          }
        } else {
          int coff = 0;
          for (size_t p = 0; p < parents_copy.size(); ++p) {
            const auto& pn = parents_copy[p];
            const int pc = extents[p];
            if (pn->requires_grad) {
              auto& dp = gm.get(pn.get());
              for (int i = 0; i < fixed_rows; ++i) {
                for (int j = 0; j < pc; ++j) {
                  dp[static_cast<size_t>(i) * pc + j] +=
                      g[static_cast<size_t>(i) * total_cols + coff + j];
                }
              }
            }
            coff += pc;
          }
        }
      });
}

template <class S>
Tensor<S> slice_rows(const Tensor<S>& a, int r0, int r1) {
  auto [r, c] = detail::rows_cols(a, "slice_rows");
  if (r0 < 0 || r1 > r || r0 > r1) {
    throw ShapeError("slice_rows: range [" + std::to_string(r0) + "," +
                     std::to_string(r1) + ") out of " + std::to_string(r));
  }
  std::vector<S> out(a.data().begin() + static_cast<size_t>(r0) * c,
                     a.data().begin() + static_cast<size_t>(r1) * c);
  auto an = a.node();
  int C = c, R0 = r0;
  return make_op<S>({r1 - r0, c}, std::move(out), {an},
                    [an, C, R0](const std::vector<S>& g, GradMap<S>& gm) {
                      if (!an->requires_grad) return;
                      auto& da = gm.get(an.get());
                      const size_t base = static_cast<size_t>(R0) * C;
                      for (size_t i = 0; i < g.size(); ++i) da[base + i] += g[i];
                    });
}

template <class S>
Tensor<S> slice_cols(const Tensor<S>& a, int c0, int c1) {
  auto [r, c] = detail::rows_cols(a, "slice_cols");
  if (c0 < 0 || c1 > c || c0 > c1) {
    throw ShapeError("slice_cols: range [" + std::to_string(c0) + "," +
                     std::to_string(c1) + ") out of " + std::to_string(c));
  }
  const int w = c1 - c0;
  std::vector<S> out(static_cast<size_t>(r) * w);
  const auto& av = a.data();
  for (int i = 0; i < r; ++i) {
    std::copy(av.begin() + static_cast<size_t>(i) * c + c0,
              av.begin() + static_cast<size_t>(i) * c + c1,
              out.begin() + static_cast<size_t>(i) * w);
  }
  auto an = a.node();
  int R = r, C = c, C0 = c0, W = w;
  return make_op<S>({r, w}, std::move(out), {an},
                    [an, R, C, C0, W](const std::vector<S>& g, GradMap<S>& gm) {
                      if (!an->requires_grad) return;
                      auto& da = gm.get(an.get());
                      for (int i = 0; i < R; ++i) {
                        for (int j = 0; j < W; ++j) {
                          da[static_cast<size_t>(i) * C + C0 + j] +=
                              g[static_cast<size_t>(i) * W + j];
                        }
                      }
                    });
}

template <class S>
Tensor<S> transpose(const Tensor<S>& a) {
  auto [r, c] = detail::rows_cols(a, "transpose");
  std::vector<S> out(a.numel());
  const auto& av = a.data();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out[static_cast<size_t>(j) * r + i] = av[static_cast<size_t>(i) * c + j];
  auto an = a.node();
  int R = r, C = c;
  return make_op<S>({c, r}, std::move(out), {an},
                    [an, R, C](const std::vector<S>& g, GradMap<S>& gm) {
                      if (!an->requires_grad) return;
                      auto& da = gm.get(an.get());
                      for (int i = 0; i < R; ++i)
                        for (int j = 0; j < C; ++j)
                          da[static_cast<size_t>(i) * C + j] +=
                              g[static_cast<size_t>(j) * R + i];
                    });
}

// Row-wise log-softmax over the last dimension of a 2-D tensor.
// Shift-invariant by construction (max subtraction).
template <class S>
Tensor<S> log_softmax_rows(const Tensor<S>& a) {
  auto [r, c] = detail::rows_cols(a, "log_softmax_rows");
  if (c < 1) throw ShapeError("log_softmax_rows: empty rows");
  std::vector<S> out(a.numel());
  const auto& av = a.data();
  for (int i = 0; i < r; ++i) {
    const S* row = av.data() + static_cast<size_t>(i) * c;
    S* orow = out.data() + static_cast<size_t>(i) * c;
    S mx = row[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    S sum = S(0);
    for (int j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
    const S lse = mx + std::log(sum);
    for (int j = 0; j < c; ++j) orow[j] = row[j] - lse;
  }
  auto an = a.node();
  auto keep = out;
  int R = r, C = c;
  return make_op<S>(
      a.shape(), std::move(out), {an},
      [an, keep = std::move(keep), R, C](const std::vector<S>& g,
                                         GradMap<S>& gm) {
        if (!an->requires_grad) return;
        auto& da = gm.get(an.get());
        for (int i = 0; i < R; ++i) {
          const S* grow = g.data() + static_cast<size_t>(i) * C;
          const S* yrow = keep.data() + static_cast<size_t>(i) * C;
          S gsum = S(0);
          for (int j = 0; j < C; ++j) gsum += grow[j];
          S* darow = da.data() + static_cast<size_t>(i) * C;
          for (int j = 0; j < C; ++j)
            darow[j] += grow[j] - std::exp(yrow[j]) * gsum;
        }
      });
}

template <class S>
Tensor<S> sum_all(const Tensor<S>& a) {
  S acc = S(0);
  for (S x : a.data()) acc += x;
  auto an = a.node();
  return make_op<S>({1}, {acc}, {an},
                    [an](const std::vector<S>& g, GradMap<S>& gm) {
                      if (!an->requires_grad) return;
                      auto& da = gm.get(an.get());
                      for (auto& x : da) x += g[0];
                    });
}

// Embedding lookup: rows of `table` selected by `ids`.
template <class S>
Tensor<S> gather_rows(const Tensor<S>& table, const std::vector<int>& ids) {
  auto [v, d] = detail::rows_cols(table, "gather_rows");
  std::vector<S> out(ids.size() * static_cast<size_t>(d));
  const auto& tv = table.data();
  for (size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || id >= v) {
      throw VocabError("gather_rows: id " + std::to_string(id) +
                       " out of vocabulary of size " + std::to_string(v));
    }
    std::copy(tv.begin() + static_cast<size_t>(id) * d,
              tv.begin() + static_cast<size_t>(id + 1) * d,
              out.begin() + i * static_cast<size_t>(d));
  }
  auto tn = table.node();
  int D = d;
  auto ids_copy = ids;
  return make_op<S>(
      {static_cast<int>(ids.size()), d}, std::move(out), {tn},
      [tn, D, ids_copy = std::move(ids_copy)](const std::vector<S>& g,
                                              GradMap<S>& gm) {
        if (!tn->requires_grad) return;
        auto& dt = gm.get(tn.get());
        for (size_t i = 0; i < ids_copy.size(); ++i) {
          const size_t src = i * static_cast<size_t>(D);
          const size_t dst = static_cast<size_t>(ids_copy[i]) * D;
          for (int j = 0; j < D; ++j) dt[dst + j] += g[src + j];
        }
      });
}

// out[i] = a[i, ids[i]]; result is [n x 1]. Used to pick target log-probs.
template <class S>
Tensor<S> take_per_row(const Tensor<S>& a, const std::vector<int>& ids) {
  auto [r, c] = detail::rows_cols(a, "take_per_row");
  if (static_cast<int>(ids.size()) != r) {
    throw ShapeError("take_per_row: " + std::to_string(ids.size()) +
                     " ids for " + std::to_string(r) + " rows");
  }
  std::vector<S> out(ids.size());
  const auto& av = a.data();
  for (int i = 0; i < r; ++i) {
    const int id = ids[static_cast<size_t>(i)];
    if (id < 0 || id >= c) {
      throw VocabError("take_per_row: id " + std::to_string(id) +
                       " out of row width " + std::to_string(c));
    }
    out[static_cast<size_t>(i)] = av[static_cast<size_t>(i) * c + id];
  }
  auto an = a.node();
  int C = c;
  auto ids_copy = ids;
  return make_op<S>({r, 1}, std::move(out), {an},
                    [an, C, ids_copy = std::move(ids_copy)](
                        const std::vector<S>& g, GradMap<S>& gm) {
                      if (!an->requires_grad) return;
                      auto& da = gm.get(an.get());
                      for (size_t i = 0; i < ids_copy.size(); ++i)
                        da[i * C + ids_copy[i]] += g[i];
                    });
}

// out[(t*Ub + u), j] = a[t, j] + b[u, j] + bias[j].
// The broadcast sum feeding the two-tower combiner; fused so a full
// T x U grid costs one node.
template <class S>
Tensor<S> outer_add_bias(const Tensor<S>& a, const Tensor<S>& b,
                         const Tensor<S>& bias) {
  auto [t, j] = detail::rows_cols(a, "outer_add_bias");
  auto [u, j2] = detail::rows_cols(b, "outer_add_bias");
  if (j != j2 || static_cast<int>(bias.numel()) != j) {
    throw ShapeError("outer_add_bias: width mismatch, " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()) +
                     " vs bias " + shape_str(bias.shape()));
  }
  std::vector<S> out(static_cast<size_t>(t) * u * j);
  const auto& av = a.data();
  const auto& bv = b.data();
  const auto& cv = bias.data();
  size_t idx = 0;
  for (int ti = 0; ti < t; ++ti) {
    const S* arow = av.data() + static_cast<size_t>(ti) * j;
    for (int ui = 0; ui < u; ++ui) {
      const S* brow = bv.data() + static_cast<size_t>(ui) * j;
      for (int ji = 0; ji < j; ++ji, ++idx) out[idx] = arow[ji] + brow[ji] + cv[ji];
    }
  }
  auto an = a.node();
  auto bn = b.node();
  auto cn = bias.node();
  int T = t, U = u, J = j;
  return make_op<S>(
      {t * u, j}, std::move(out), {an, bn, cn},
      [an, bn, cn, T, U, J](const std::vector<S>& g, GradMap<S>& gm) {
        if (an->requires_grad) {
          auto& da = gm.get(an.get());
          for (int ti = 0; ti < T; ++ti) {
            S* darow = da.data() + static_cast<size_t>(ti) * J;
            for (int ui = 0; ui < U; ++ui) {
              const S* grow =
                  g.data() + (static_cast<size_t>(ti) * U + ui) * J;
              for (int ji = 0; ji < J; ++ji) darow[ji] += grow[ji];
            }
          }
        }
        if (bn->requires_grad) {
          auto& db = gm.get(bn.get());
          for (int ti = 0; ti < T; ++ti) {
            for (int ui = 0; ui < U; ++ui) {
              const S* grow =
                  g.data() + (static_cast<size_t>(ti) * U + ui) * J;
              S* dbrow = db.data() + static_cast<size_t>(ui) * J;
              for (int ji = 0; ji < J; ++ji) dbrow[ji] += grow[ji];
            }
          }
        }
        if (cn->requires_grad) {
          auto& dc = gm.get(cn.get());
          const size_t cells = static_cast<size_t>(T) * U;
          for (size_t r = 0; r < cells; ++r) {
            const S* grow = g.data() + r * J;
            for (int ji = 0; ji < J; ++ji) dc[ji] += grow[ji];
          }
        }
      });
}

// Patch extraction for 1-D convolution over a [T x C] sequence.
// Output row t' lists the kernel_size taps of channel blocks:
// out[t', k*C + c] = in[t'*stride + k*dilation - pad_left, c], zero out of range.
template <class S>
Tensor<S> im2col(const Tensor<S>& in, int kernel, int stride, int dilation,
                 int pad_left) {
  auto [t, c] = detail::rows_cols(in, "im2col");
  if (kernel < 1 || stride < 1 || dilation < 1) {
    throw ArgumentError("im2col: kernel, stride, dilation must be positive");
  }
  const int t_out = t == 0 ? 0 : (t + stride - 1) / stride;
  std::vector<S> out(static_cast<size_t>(t_out) * kernel * c, S(0));
  const auto& iv = in.data();
  for (int to = 0; to < t_out; ++to) {
    for (int k = 0; k < kernel; ++k) {
      const int ti = to * stride + k * dilation - pad_left;
      if (ti < 0 || ti >= t) continue;
      std::copy(iv.begin() + static_cast<size_t>(ti) * c,
                iv.begin() + static_cast<size_t>(ti + 1) * c,
                out.begin() + (static_cast<size_t>(to) * kernel + k) * c);
    }
  }
  auto in_node = in.node();
  int T = t, C = c, K = kernel, ST = stride, D = dilation, PL = pad_left,
      TO = t_out;
  return make_op<S>(
      {t_out, kernel * c}, std::move(out), {in_node},
      [in_node, T, C, K, ST, D, PL, TO](const std::vector<S>& g,
                                        GradMap<S>& gm) {
        if (!in_node->requires_grad) return;
        auto& di = gm.get(in_node.get());
        for (int to = 0; to < TO; ++to) {
          for (int k = 0; k < K; ++k) {
            const int ti = to * ST + k * D - PL;
            if (ti < 0 || ti >= T) continue;
            const S* grow = g.data() + (static_cast<size_t>(to) * K + k) * C;
            S* drow = di.data() + static_cast<size_t>(ti) * C;
            for (int cc = 0; cc < C; ++cc) drow[cc] += grow[cc];
          }
        }
      });
}

}  // namespace cascade
