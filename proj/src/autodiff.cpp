/*
 * Copyright 2026 The MFGAT Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "mfgat/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "mfgat/error.hpp"
#include "mfgat/kernels.hpp"

namespace mfgat::ad {
namespace {

std::atomic<std::uint64_t> g_next_tape_id{1};

bool any_grad(std::initializer_list<Var> vars) {
  return std::any_of(vars.begin(), vars.end(), [](const Var& v) { return v.requires_grad(); });
}

struct Broadcast {
  std::size_t rows, cols;
};

std::size_t bdim(std::size_t a, std::size_t b, const char* op) {
  if (a == b || b == 1) return a;
  if (a == 1) return b;
  throw InvalidInput(std::string(op) + ": dimensions " + std::to_string(a) + " and " +
                     std::to_string(b) + " do not broadcast");
}

Broadcast broadcast_shape(const Tensor& a, const Tensor& b, const char* op) {
  return {bdim(a.rows(), b.rows(), op), bdim(a.cols(), b.cols(), op)};
}

inline double bget(const Tensor& t, std::size_t r, std::size_t c) {
  return t(t.rows() == 1 ? 0 : r, t.cols() == 1 ? 0 : c);
}

inline double& bref(Tensor& t, std::size_t r, std::size_t c) {
  return t(t.rows() == 1 ? 0 : r, t.cols() == 1 ? 0 : c);
}

}  // namespace

// ---------------------------------------------------------------------------
// Var / Tape

const Tensor& Var::value() const { return tape_->value(index_); }
const Tensor& Var::grad() const { return tape_->grad(index_); }
bool Var::requires_grad() const { return tape_->requires_grad(index_); }

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {}

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.grad = Tensor(value.rows(), value.cols());
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.op = "leaf";
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn backward, std::string op) {
  if (consumed_) throw InvalidInput("tape already consumed by backward()");
  Node n;
  n.grad = Tensor(value.rows(), value.cols());
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  n.op = std::move(op);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) throw InvalidInput("backward: variable belongs to another tape");
  if (consumed_) throw InvalidInput("backward: tape already consumed");
  const Tensor& lv = loss.value();
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw InvalidInput("backward: loss must be 1x1, got " + lv.shape_string());
  }
  consumed_ = true;
  nodes_[loss.index()].grad(0, 0) = 1.0;
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward) n.backward(*this, i);
  }
}

Tape& same_tape(const Var& a, const Var& b) {
  if (!a.valid() || !b.valid()) throw InvalidInput("operation on an unbound variable");
  if (a.tape() != b.tape()) throw InvalidInput("operands live on different tapes");
  return *a.tape();
}

// ---------------------------------------------------------------------------
// Linear algebra

namespace {

Var matmul_impl(const Var& a, const Var& b, bool trans_b, const char* op) {
  Tape& tape = same_tape(a, b);
  Tensor out;
  kernels::gemm(a.value(), false, b.value(), trans_b, out, false);
  const std::size_t ia = a.index(), ib = b.index();
  return tape.record(
      std::move(out), any_grad({a, b}),
      [ia, ib, trans_b](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(ia)) {
          // dA = G B^T  (or G B when b was used transposed)
          kernels::gemm(g, false, t.value(ib), !trans_b, t.grad_mut(ia), true);
        }
        if (t.requires_grad(ib)) {
          if (trans_b) {
            kernels::gemm(g, true, t.value(ia), false, t.grad_mut(ib), true);  // G^T A
          } else {
            kernels::gemm(t.value(ia), true, g, false, t.grad_mut(ib), true);  // A^T G
          }
        }
      },
      op);
}

}  // namespace

Var matmul(const Var& a, const Var& b) { return matmul_impl(a, b, false, "matmul"); }

Var matmul_nt(const Var& a, const Var& b) { return matmul_impl(a, b, true, "matmul_nt"); }

Var transpose(const Var& a) {
  Tape& tape = *a.tape();
  const std::size_t ia = a.index();
  return tape.record(a.value().transposed(), a.requires_grad(),
                     [ia](Tape& t, std::size_t self) {
                       const Tensor& g = t.grad(self);
                       Tensor& ga = t.grad_mut(ia);
                       for (std::size_t r = 0; r < g.rows(); ++r)
                         for (std::size_t c = 0; c < g.cols(); ++c) ga(c, r) += g(r, c);
                     },
                     "transpose");
}

// ---------------------------------------------------------------------------
// Elementwise

Var add(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  const Broadcast s = broadcast_shape(a.value(), b.value(), "add");
  Tensor out(s.rows, s.cols);
  for (std::size_t r = 0; r < s.rows; ++r)
    for (std::size_t c = 0; c < s.cols; ++c)
      out(r, c) = bget(a.value(), r, c) + bget(b.value(), r, c);
  const std::size_t ia = a.index(), ib = b.index();
  return tape.record(std::move(out), any_grad({a, b}),
                     [ia, ib](Tape& tp, std::size_t self) {
                       const Tensor& g = tp.grad(self);
                       const bool ga = tp.requires_grad(ia), gb = tp.requires_grad(ib);
                       for (std::size_t r = 0; r < g.rows(); ++r)
                         for (std::size_t c = 0; c < g.cols(); ++c) {
                           if (ga) bref(tp.grad_mut(ia), r, c) += g(r, c);
                           if (gb) bref(tp.grad_mut(ib), r, c) += g(r, c);
                         }
                     },
                     "add");
}

Var sub(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  const Broadcast s = broadcast_shape(a.value(), b.value(), "sub");
  Tensor out(s.rows, s.cols);
  for (std::size_t r = 0; r < s.rows; ++r)
    for (std::size_t c = 0; c < s.cols; ++c)
      out(r, c) = bget(a.value(), r, c) - bget(b.value(), r, c);
  const std::size_t ia = a.index(), ib = b.index();
  return tape.record(std::move(out), any_grad({a, b}),
                     [ia, ib](Tape& tp, std::size_t self) {
                       const Tensor& g = tp.grad(self);
                       const bool ga = tp.requires_grad(ia), gb = tp.requires_grad(ib);
                       for (std::size_t r = 0; r < g.rows(); ++r)
                         for (std::size_t c = 0; c < g.cols(); ++c) {
                           if (ga) bref(tp.grad_mut(ia), r, c) += g(r, c);
                           if (gb) bref(tp.grad_mut(ib), r, c) -= g(r, c);
                         }
                     },
                     "sub");
}

Var mul(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  const Broadcast s = broadcast_shape(a.value(), b.value(), "mul");
  Tensor out(s.rows, s.cols);
  for (std::size_t r = 0; r < s.rows; ++r)
    for (std::size_t c = 0; c < s.cols; ++c)
      out(r, c) = bget(a.value(), r, c) * bget(b.value(), r, c);
  const std::size_t ia = a.index(), ib = b.index();
  return tape.record(std::move(out), any_grad({a, b}),
                     [ia, ib](Tape& tp, std::size_t self) {
                       const Tensor& g = tp.grad(self);
                       const Tensor& av = tp.value(ia);
                       const Tensor& bv = tp.value(ib);
                       const bool ga = tp.requires_grad(ia), gb = tp.requires_grad(ib);
                       for (std::size_t r = 0; r < g.rows(); ++r)
                         for (std::size_t c = 0; c < g.cols(); ++c) {
                           if (ga) bref(tp.grad_mut(ia), r, c) += g(r, c) * bget(bv, r, c);
                           if (gb) bref(tp.grad_mut(ib), r, c) += g(r, c) * bget(av, r, c);
                         }
                     },
                     "mul");
}

Var scale(const Var& a, double s) {
  Tape& tape = *a.tape();
  Tensor out = a.value();
  for (double& v : out.values()) v *= s;
  const std::size_t ia = a.index();
  return tape.record(std::move(out), a.requires_grad(),
                     [ia, s](Tape& t, std::size_t self) {
                       kernels::axpy_serial(s, t.grad(self), t.grad_mut(ia));
                     },
                     "scale");
}

Var linear(const Var& x, const Var& w, const Var& b) { return add(matmul_nt(x, w), b); }

// ---------------------------------------------------------------------------
// Nonlinearities

Var leaky_relu(const Var& x, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw InvalidInput("leaky_relu: slope must lie in (0,1)");
  Tape& t = *x.tape();
  Tensor out = x.value();
  for (double& v : out.values()) v = v >= 0 ? v : slope * v;
  const std::size_t ix = x.index();
  return t.record(std::move(out), x.requires_grad(),
                  [ix, slope](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.grad(self);
                    const Tensor& xv = tp.value(ix);
                    Tensor& gx = tp.grad_mut(ix);
                    for (std::size_t i = 0; i < g.size(); ++i)
                      gx[i] += xv[i] >= 0 ? g[i] : slope * g[i];
                  },
                  "leaky_relu");
}

Var relu(const Var& x) {
  Tape& t = *x.tape();
  Tensor out = x.value();
  for (double& v : out.values()) v = v >= 0 ? v : 0.0;
  const std::size_t ix = x.index();
  return t.record(std::move(out), x.requires_grad(),
                  [ix](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.grad(self);
                    const Tensor& xv = tp.value(ix);
                    Tensor& gx = tp.grad_mut(ix);
                    for (std::size_t i = 0; i < g.size(); ++i)
                      if (xv[i] >= 0) gx[i] += g[i];
                  },
                  "relu");
}

Var elu(const Var& x, double alpha) {
  Tape& t = *x.tape();
  Tensor out = x.value();
  for (double& v : out.values()) v = v >= 0 ? v : alpha * std::expm1(v);
  const std::size_t ix = x.index();
  return t.record(std::move(out), x.requires_grad(),
                  [ix, alpha](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.grad(self);
                    const Tensor& xv = tp.value(ix);
                    Tensor& gx = tp.grad_mut(ix);
                    for (std::size_t i = 0; i < g.size(); ++i)
                      gx[i] += xv[i] >= 0 ? g[i] : g[i] * alpha * std::exp(xv[i]);
                  },
                  "elu");
}

// ---------------------------------------------------------------------------
// Attention and normalization

Var masked_softmax(const Var& scores, const Mask& mask) {
  Tape& t = *scores.tape();
  const Tensor& s = scores.value();
  if (mask.size() != s.size()) {
    throw InvalidInput("masked_softmax: mask has " + std::to_string(mask.size()) +
                       " entries for scores " + s.shape_string());
  }
  Tensor out(s.rows(), s.cols());
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const std::uint8_t* m = mask.data() + r * s.cols();
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < s.cols(); ++c) {
      if (!m[c]) continue;
      any = true;
      // NaN wins so that a blown-up score shows up in the loss
      if (std::isnan(s(r, c)) || s(r, c) > mx) mx = std::isnan(mx) ? mx : s(r, c);
    }
    if (!any) {
      throw InvalidInput("masked_softmax: row " + std::to_string(r) + " has an empty mask");
    }
    double z = 0.0;
    for (std::size_t c = 0; c < s.cols(); ++c) {
      if (m[c]) {
        out(r, c) = std::exp(s(r, c) - mx);
        z += out(r, c);
      }
    }
    for (std::size_t c = 0; c < s.cols(); ++c)
      if (m[c]) out(r, c) /= z;
  }
  const std::size_t is = scores.index();
  return t.record(std::move(out), scores.requires_grad(),
                  [is](Tape& tp, std::size_t self) {
                    // masked-out outputs are constant 0, so y_i = 0 kills their terms
                    const Tensor& y = tp.value(self);
                    const Tensor& g = tp.grad(self);
                    Tensor& gs = tp.grad_mut(is);
                    for (std::size_t r = 0; r < y.rows(); ++r) {
                      double dot = 0.0;
                      for (std::size_t c = 0; c < y.cols(); ++c) dot += y(r, c) * g(r, c);
                      for (std::size_t c = 0; c < y.cols(); ++c)
                        gs(r, c) += y(r, c) * (g(r, c) - dot);
                    }
                  },
                  "masked_softmax");
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  Tape& t = same_tape(x, gamma);
  same_tape(x, beta);
  if (!(eps >= 0.0)) throw InvalidInput("layer_norm: eps must be non-negative");
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  if (d == 0) throw InvalidInput("layer_norm: zero feature dimension");
  if (gamma.rows() != 1 || gamma.cols() != d || beta.rows() != 1 || beta.cols() != d) {
    throw InvalidInput("layer_norm: gamma/beta must be 1x" + std::to_string(d));
  }
  // Per-row statistics kept for backward: normalized values and sigma.
  Tensor xhat(n, d);
  std::vector<double> sigma(n), denom(n);
  Tensor out(n, d);
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  for (std::size_t r = 0; r < n; ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += xv(r, c);
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (xv(r, c) - mu) * (xv(r, c) - mu);
    var /= static_cast<double>(d);
    sigma[r] = std::sqrt(var);
    denom[r] = sigma[r] + eps;
    for (std::size_t c = 0; c < d; ++c) {
      const double centered = xv(r, c) - mu;
      xhat(r, c) = denom[r] > 0 ? centered / denom[r] : 0.0;
      out(r, c) = xhat(r, c) * gv(0, c) + bv(0, c);
    }
  }
  const std::size_t ix = x.index(), ig = gamma.index(), ib = beta.index();
  return t.record(
      std::move(out), any_grad({x, gamma, beta}),
      [ix, ig, ib, xhat = std::move(xhat), sigma = std::move(sigma),
       denom = std::move(denom)](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& gv = tp.value(ig);
        const std::size_t n = g.rows(), d = g.cols();
        const double dd = static_cast<double>(d);
        if (tp.requires_grad(ig) || tp.requires_grad(ib)) {
          Tensor& gg = tp.grad_mut(ig);
          Tensor& gb = tp.grad_mut(ib);
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) {
              gg(0, c) += g(r, c) * xhat(r, c);
              gb(0, c) += g(r, c);
            }
        }
        if (!tp.requires_grad(ix)) return;
        Tensor& gx = tp.grad_mut(ix);
        std::vector<double> dxhat(d);
        for (std::size_t r = 0; r < n; ++r) {
          if (!(denom[r] > 0)) continue;
          double mean_dxhat = 0.0, dot = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            dxhat[c] = g(r, c) * gv(0, c);
            mean_dxhat += dxhat[c];
            dot += dxhat[c] * xhat(r, c);  // xhat = centered / denom
          }
          mean_dxhat /= dd;
          // d sigma / dx_k = centered_k / (d sigma); centered = xhat * denom
          const double coeff = sigma[r] > 0 ? dot * denom[r] / (dd * sigma[r] * denom[r]) : 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            const double centered = xhat(r, c) * denom[r];
            gx(r, c) += (dxhat[c] - mean_dxhat) / denom[r] - coeff * centered / denom[r];
          }
        }
      },
      "layer_norm");
}

Var dropout(const Var& x, double p, Mode mode, RngStream& rng, bool rescale) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidInput("dropout: p must lie in [0,1)");
  if (mode == Mode::eval || p == 0.0) return x;
  Tape& t = *x.tape();
  const double keep_scale = rescale ? 1.0 / (1.0 - p) : 1.0;
  Tensor factors(x.rows(), x.cols());
  for (double& f : factors.values()) f = rng.bernoulli(p) ? 0.0 : keep_scale;
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[i];
  const std::size_t ix = x.index();
  return t.record(std::move(out), x.requires_grad(),
                  [ix, factors = std::move(factors)](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.grad(self);
                    Tensor& gx = tp.grad_mut(ix);
                    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factors[i];
                  },
                  "dropout");
}

Var cross_entropy(const Var& logits, std::size_t label) {
  Tape& t = *logits.tape();
  const Tensor& z = logits.value();
  if (z.rows() != 1) throw InvalidInput("cross_entropy: logits must be a single row");
  if (label >= z.cols()) {
    throw InvalidInput("cross_entropy: label " + std::to_string(label) + " out of range for " +
                       std::to_string(z.cols()) + " classes");
  }
  double mx = z(0, 0);
  for (std::size_t c = 1; c < z.cols(); ++c) mx = std::max(mx, z(0, c));
  double se = 0.0;
  for (std::size_t c = 0; c < z.cols(); ++c) se += std::exp(z(0, c) - mx);
  const double lse = mx + std::log(se);
  Tensor out(1, 1, lse - z(0, label));
  const std::size_t iz = logits.index();
  return t.record(std::move(out), logits.requires_grad(),
                  [iz, label, lse](Tape& tp, std::size_t self) {
                    const double g = tp.grad(self)(0, 0);
                    const Tensor& zv = tp.value(iz);
                    Tensor& gz = tp.grad_mut(iz);
                    for (std::size_t c = 0; c < zv.cols(); ++c) {
                      const double p = std::exp(zv(0, c) - lse);
                      gz(0, c) += g * (p - (c == label ? 1.0 : 0.0));
                    }
                  },
                  "cross_entropy");
}

// ---------------------------------------------------------------------------
// Structure

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidInput("concat_cols: no inputs");
  Tape& t = *parts.front().tape();
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  bool rg = false;
  for (const Var& p : parts) {
    same_tape(parts.front(), p);
    if (p.rows() != rows) throw InvalidInput("concat_cols: row counts differ");
    cols += p.cols();
    rg = rg || p.requires_grad();
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> idx, offs;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) out(r, off + c) = v(r, c);
    idx.push_back(p.index());
    offs.push_back(off);
    off += v.cols();
  }
  return t.record(std::move(out), rg,
                  [idx, offs](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.grad(self);
                    for (std::size_t k = 0; k < idx.size(); ++k) {
                      if (!tp.requires_grad(idx[k])) continue;
                      Tensor& gp = tp.grad_mut(idx[k]);
                      for (std::size_t r = 0; r < gp.rows(); ++r)
                        for (std::size_t c = 0; c < gp.cols(); ++c) gp(r, c) += g(r, offs[k] + c);
                    }
                  },
                  "concat_cols");
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidInput("concat_rows: no inputs");
  Tape& t = *parts.front().tape();
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  bool rg = false;
  for (const Var& p : parts) {
    same_tape(parts.front(), p);
    if (p.cols() != cols) throw InvalidInput("concat_rows: column counts differ");
    rows += p.rows();
    rg = rg || p.requires_grad();
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> idx, offs;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    std::copy(v.values().begin(), v.values().end(), out.data() + off * cols);
    idx.push_back(p.index());
    offs.push_back(off);
    off += v.rows();
  }
  return t.record(std::move(out), rg,
                  [idx, offs](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.grad(self);
                    for (std::size_t k = 0; k < idx.size(); ++k) {
                      if (!tp.requires_grad(idx[k])) continue;
                      Tensor& gp = tp.grad_mut(idx[k]);
                      const double* src = g.data() + offs[k] * g.cols();
                      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += src[i];
                    }
                  },
                  "concat_rows");
}

Var slice(const Var& a, std::size_t row0, std::size_t nrows, std::size_t col0, std::size_t ncols) {
  const Tensor& v = a.value();
  if (row0 + nrows > v.rows() || col0 + ncols > v.cols()) {
    throw InvalidInput("slice: window exceeds " + v.shape_string());
  }
  Tensor out(nrows, ncols);
  for (std::size_t r = 0; r < nrows; ++r)
    for (std::size_t c = 0; c < ncols; ++c) out(r, c) = v(row0 + r, col0 + c);
  const std::size_t ia = a.index();
  return a.tape()->record(std::move(out), a.requires_grad(),
                          [ia, row0, col0](Tape& tp, std::size_t self) {
                            const Tensor& g = tp.grad(self);
                            Tensor& ga = tp.grad_mut(ia);
                            for (std::size_t r = 0; r < g.rows(); ++r)
                              for (std::size_t c = 0; c < g.cols(); ++c)
                                ga(row0 + r, col0 + c) += g(r, c);
                          },
                          "slice");
}

// ---------------------------------------------------------------------------
// Reductions

Var sum(const Var& a) {
  const std::size_t ia = a.index();
  return a.tape()->record(Tensor(1, 1, a.value().sum()), a.requires_grad(),
                          [ia](Tape& tp, std::size_t self) {
                            const double g = tp.grad(self)(0, 0);
                            for (double& v : tp.grad_mut(ia).values()) v += g;
                          },
                          "sum");
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw InvalidInput("mean: empty tensor");
  const std::size_t ia = a.index();
  return a.tape()->record(Tensor(1, 1, a.value().sum() / n), a.requires_grad(),
                          [ia, n](Tape& tp, std::size_t self) {
                            const double g = tp.grad(self)(0, 0) / n;
                            for (double& v : tp.grad_mut(ia).values()) v += g;
                          },
                          "mean");
}

Var row_sum(const Var& a) {
  const Tensor& v = a.value();
  Tensor out(v.rows(), 1);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) out(r, 0) += v(r, c);
  const std::size_t ia = a.index();
  return a.tape()->record(std::move(out), a.requires_grad(),
                          [ia](Tape& tp, std::size_t self) {
                            const Tensor& g = tp.grad(self);
                            Tensor& ga = tp.grad_mut(ia);
                            for (std::size_t r = 0; r < ga.rows(); ++r)
                              for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g(r, 0);
                          },
                          "row_sum");
}

}  // namespace mfgat::ad
