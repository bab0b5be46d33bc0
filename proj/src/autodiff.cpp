#include "aircast/autodiff.hpp"

#include <cmath>
#include <memory>

namespace aircast {

namespace {

using MapRM = Eigen::Map<RowMatrix>;
using CMapRM = Eigen::Map<const RowMatrix>;

MapRM map2(Tensor& t, Index rows, Index cols) { return MapRM(t.data.data(), rows, cols); }
CMapRM cmap2(const Tensor& t, Index rows, Index cols) {
  return CMapRM(t.data.data(), rows, cols);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

void require_rank(const Tensor& t, Index rank, const char* op) {
  require(t.rank() == rank, std::string(op) + ": expected rank " + std::to_string(rank) +
                                " tensor, got shape " + shape_string(t.shape));
}

}  // namespace

Parameter make_parameter(std::string id, Tensor value) {
  Parameter p;
  p.id = std::move(id);
  p.grad = Tensor::zeros(value.shape);
  p.value = std::move(value);
  return p;
}

Index Tape::check(Value v) const {
  if (v.node < 0 || v.node >= size())
    throw InvalidArgument("value handle does not belong to this tape");
  return v.node;
}

Value Tape::leaf(Tensor value, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return Value{size() - 1};
}

Value Tape::emplace(Tensor value, std::vector<Index> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.inputs = std::move(inputs);
  for (Index i : n.inputs) {
    check(Value{i});
    if (nodes_[static_cast<std::size_t>(i)].needs_grad) n.needs_grad = true;
  }
  // The closure (and any cached forward data it captures) is only kept when a
  // gradient can flow through this node.
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Value{size() - 1};
}

Tensor& Tape::grad_ref(Index node) {
  Node& n = nodes_[static_cast<std::size_t>(node)];
  if (!n.grad_allocated) {
    n.grad = Tensor::zeros(n.value.shape);
    n.grad_allocated = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(Value v) { return grad_ref(check(v)); }

void Tape::backward(Value loss) {
  const Index l = check(loss);
  if (backward_done_) throw InvalidArgument("backward was already run on this tape");
  if (nodes_[static_cast<std::size_t>(l)].value.size() != 1)
    throw InvalidArgument("backward: loss must be a scalar, got shape " +
                          shape_string(nodes_[static_cast<std::size_t>(l)].value.shape));
  backward_done_ = true;
  grad_ref(l).data.setConstant(1.0);
  for (Index i = l; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.needs_grad || !n.backward || !n.grad_allocated) continue;
    n.backward(*this, i);
  }
}

void Tape::clear() {
  nodes_.clear();
  backward_done_ = false;
}

// ---- elementwise ----

Value add(Tape& t, Value a, Value b) {
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  require(same_shape(va, vb),
          "add: shape mismatch " + shape_string(va.shape) + " vs " + shape_string(vb.shape));
  Tensor out = va;
  out.data += vb.data;
  return t.emplace(std::move(out), {a.node, b.node}, [a = a.node, b = b.node](Tape& t, Index self) {
    const Eigen::ArrayXd& g = t.grad_ref(self).data;
    if (t.needs_grad(a)) t.grad_ref(a).data += g;
    if (t.needs_grad(b)) t.grad_ref(b).data += g;
  });
}

Value mul(Tape& t, Value a, Value b) {
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  require(same_shape(va, vb),
          "mul: shape mismatch " + shape_string(va.shape) + " vs " + shape_string(vb.shape));
  Tensor out = va;
  out.data *= vb.data;
  return t.emplace(std::move(out), {a.node, b.node}, [a = a.node, b = b.node](Tape& t, Index self) {
    const Eigen::ArrayXd& g = t.grad_ref(self).data;
    if (t.needs_grad(a)) t.grad_ref(a).data += g * t.value_of(b).data;
    if (t.needs_grad(b)) t.grad_ref(b).data += g * t.value_of(a).data;
  });
}

Value scale(Tape& t, Value a, double k) {
  Tensor out = t.value(a);
  out.data *= k;
  return t.emplace(std::move(out), {a.node}, [a = a.node, k](Tape& t, Index self) {
    if (t.needs_grad(a)) t.grad_ref(a).data += k * t.grad_ref(self).data;
  });
}

Value relu(Tape& t, Value a) {
  Tensor out = t.value(a);
  out.data = out.data.max(0.0);
  return t.emplace(std::move(out), {a.node}, [a = a.node](Tape& t, Index self) {
    if (!t.needs_grad(a)) return;
    const Eigen::ArrayXd& x = t.value_of(a).data;
    t.grad_ref(a).data += (x > 0.0).cast<double>() * t.grad_ref(self).data;
  });
}

Value sigmoid(Tape& t, Value a) {
  Tensor out = t.value(a);
  for (Index i = 0; i < out.size(); ++i) {
    const double x = out.data[i];
    out.data[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return t.emplace(std::move(out), {a.node}, [a = a.node](Tape& t, Index self) {
    if (!t.needs_grad(a)) return;
    const Eigen::ArrayXd& y = t.value_of(self).data;
    t.grad_ref(a).data += y * (1.0 - y) * t.grad_ref(self).data;
  });
}

Value tanh(Tape& t, Value a) {
  Tensor out = t.value(a);
  out.data = out.data.tanh();
  return t.emplace(std::move(out), {a.node}, [a = a.node](Tape& t, Index self) {
    if (!t.needs_grad(a)) return;
    const Eigen::ArrayXd& y = t.value_of(self).data;
    t.grad_ref(a).data += (1.0 - y * y) * t.grad_ref(self).data;
  });
}

// ---- matrix ----

Value matmul(Tape& t, Value a, Value b) {
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  require_rank(va, 2, "matmul");
  require_rank(vb, 2, "matmul");
  require(va.shape[1] == vb.shape[0], "matmul: inner extents disagree, " + shape_string(va.shape) +
                                          " vs " + shape_string(vb.shape));
  const Index m = va.shape[0];
  const Index k = va.shape[1];
  const Index n = vb.shape[1];
  Tensor out = Tensor::zeros({m, n});
  map2(out, m, n).noalias() = cmap2(va, m, k) * cmap2(vb, k, n);
  return t.emplace(std::move(out), {a.node, b.node},
                   [a = a.node, b = b.node, m, k, n](Tape& t, Index self) {
                     CMapRM g(t.grad_ref(self).data.data(), m, n);
                     if (t.needs_grad(a)) {
                       MapRM da(t.grad_ref(a).data.data(), m, k);
                       da.noalias() += g * cmap2(t.value_of(b), k, n).transpose();
                     }
                     if (t.needs_grad(b)) {
                       MapRM db(t.grad_ref(b).data.data(), k, n);
                       db.noalias() += cmap2(t.value_of(a), m, k).transpose() * g;
                     }
                   });
}

Value add_bias_rows(Tape& t, Value m, Value bias) {
  const Tensor& vm = t.value(m);
  const Tensor& vb = t.value(bias);
  require_rank(vm, 2, "add_bias_rows");
  require_rank(vb, 1, "add_bias_rows bias");
  require(vm.shape[1] == vb.shape[0], "add_bias_rows: bias length " + shape_string(vb.shape) +
                                          " does not match columns of " + shape_string(vm.shape));
  const Index R = vm.shape[0];
  const Index C = vm.shape[1];
  Tensor out = vm;
  MapRM om(out.data.data(), R, C);
  om.rowwise() += CMapRM(vb.data.data(), 1, C).row(0);
  return t.emplace(std::move(out), {m.node, bias.node},
                   [m = m.node, bias = bias.node, R, C](Tape& t, Index self) {
                     CMapRM g(t.grad_ref(self).data.data(), R, C);
                     if (t.needs_grad(m)) t.grad_ref(m).data += t.grad_ref(self).data;
                     if (t.needs_grad(bias)) {
                       MapRM db(t.grad_ref(bias).data.data(), 1, C);
                       db.noalias() += g.colwise().sum();
                     }
                   });
}

Value row(Tape& t, Value m, Index r) {
  const Tensor& vm = t.value(m);
  require_rank(vm, 2, "row");
  require(r >= 0 && r < vm.shape[0], "row: index out of range");
  const Index C = vm.shape[1];
  Tensor out = Tensor::zeros({1, C});
  out.data = vm.data.segment(r * C, C);
  return t.emplace(std::move(out), {m.node}, [m = m.node, r, C](Tape& t, Index self) {
    if (t.needs_grad(m))
      t.grad_ref(m).data.segment(r * C, C) += t.grad_ref(self).data;
  });
}

Value slice_cols(Tape& t, Value m, Index c0, Index c1) {
  const Tensor& vm = t.value(m);
  require_rank(vm, 2, "slice_cols");
  require(c0 >= 0 && c0 < c1 && c1 <= vm.shape[1], "slice_cols: bad column range");
  const Index R = vm.shape[0];
  const Index C = vm.shape[1];
  const Index W = c1 - c0;
  Tensor out = Tensor::zeros({R, W});
  map2(out, R, W) = cmap2(vm, R, C).middleCols(c0, W);
  return t.emplace(std::move(out), {m.node}, [m = m.node, c0, R, C, W](Tape& t, Index self) {
    if (!t.needs_grad(m)) return;
    MapRM dm(t.grad_ref(m).data.data(), R, C);
    dm.middleCols(c0, W) += cmap2(t.grad_ref(self), R, W);
  });
}

Value concat_rows(Tape& t, const std::vector<Value>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  const Index C = t.value(parts.front()).rank() == 2 ? t.value(parts.front()).shape[1] : -1;
  Index rows = 0;
  std::vector<Index> inputs;
  for (Value p : parts) {
    const Tensor& v = t.value(p);
    require_rank(v, 2, "concat_rows");
    require(v.shape[1] == C, "concat_rows: column extents disagree");
    rows += v.shape[0];
    inputs.push_back(p.node);
  }
  Tensor out = Tensor::zeros({rows, C});
  Index at = 0;
  for (Value p : parts) {
    const Tensor& v = t.value(p);
    out.data.segment(at, v.size()) = v.data;
    at += v.size();
  }
  return t.emplace(std::move(out), inputs, [inputs, C](Tape& t, Index self) {
    const Eigen::ArrayXd& g = t.grad_ref(self).data;
    Index at = 0;
    for (Index node : inputs) {
      const Index n = t.value_of(node).size();
      if (t.needs_grad(node)) t.grad_ref(node).data += g.segment(at, n);
      at += n;
    }
  });
}

Value reshape(Tape& t, Value a, std::vector<Index> shape) {
  const Tensor& va = t.value(a);
  require(shape_size(shape) == va.size(), "reshape: size mismatch, " + shape_string(va.shape) +
                                              " cannot become " + shape_string(shape));
  Tensor out;
  out.shape = std::move(shape);
  out.data = va.data;
  return t.emplace(std::move(out), {a.node}, [a = a.node](Tape& t, Index self) {
    if (t.needs_grad(a)) t.grad_ref(a).data += t.grad_ref(self).data;
  });
}

// ---- convolution / pooling ----

Value conv2d(Tape& t, Value input, Value kernels) {
  const Tensor& x = t.value(input);
  const Tensor& k = t.value(kernels);
  require_rank(x, 3, "conv2d input");
  require_rank(k, 4, "conv2d kernels");
  require(k.shape[1] == x.shape[0], "conv2d: kernel channel extent " + shape_string(k.shape) +
                                        " does not match input " + shape_string(x.shape));
  const Index Ci = x.shape[0], H = x.shape[1], W = x.shape[2];
  const Index Co = k.shape[0], kh = k.shape[2], kw = k.shape[3];
  require(kh % 2 == 1 && kw % 2 == 1, "conv2d: same padding needs odd kernel extents");
  const Index ph = kh / 2, pw = kw / 2;
  const Index F = Ci * kh * kw;

  auto cols = std::make_shared<RowMatrix>(H * W, F);
  for (Index y = 0; y < H; ++y) {
    for (Index xx = 0; xx < W; ++xx) {
      const Index r = y * W + xx;
      for (Index ci = 0; ci < Ci; ++ci) {
        for (Index dy = 0; dy < kh; ++dy) {
          const Index iy = y + dy - ph;
          for (Index dx = 0; dx < kw; ++dx) {
            const Index ix = xx + dx - pw;
            const Index c = (ci * kh + dy) * kw + dx;
            (*cols)(r, c) =
                (iy >= 0 && iy < H && ix >= 0 && ix < W) ? x.at(ci, iy, ix) : 0.0;
          }
        }
      }
    }
  }

  Tensor out = Tensor::zeros({Co, H, W});
  MapRM(out.data.data(), Co, H * W).noalias() = cmap2(k, Co, F) * cols->transpose();
  return t.emplace(
      std::move(out), {input.node, kernels.node},
      [input = input.node, kernels = kernels.node, cols, Ci, H, W, Co, kh, kw, ph, pw,
       F](Tape& t, Index self) {
        CMapRM g(t.grad_ref(self).data.data(), Co, H * W);
        if (t.needs_grad(kernels)) {
          MapRM dk(t.grad_ref(kernels).data.data(), Co, F);
          dk.noalias() += g * (*cols);
        }
        if (t.needs_grad(input)) {
          RowMatrix dcols = g.transpose() * cmap2(t.value_of(kernels), Co, F);
          Tensor& dx = t.grad_ref(input);
          for (Index y = 0; y < H; ++y) {
            for (Index xx = 0; xx < W; ++xx) {
              const Index r = y * W + xx;
              for (Index ci = 0; ci < Ci; ++ci) {
                for (Index dy = 0; dy < kh; ++dy) {
                  const Index iy = y + dy - ph;
                  if (iy < 0 || iy >= H) continue;
                  for (Index dx_ = 0; dx_ < kw; ++dx_) {
                    const Index ix = xx + dx_ - pw;
                    if (ix < 0 || ix >= W) continue;
                    dx.at(ci, iy, ix) += dcols(r, (ci * kh + dy) * kw + dx_);
                  }
                }
              }
            }
          }
        }
      });
}

Value conv1d(Tape& t, Value input, Value kernels, bool same_padding) {
  const Tensor& x = t.value(input);
  const Tensor& k = t.value(kernels);
  require_rank(x, 2, "conv1d input");
  require_rank(k, 3, "conv1d kernels");
  require(k.shape[1] == x.shape[0], "conv1d: kernel channel extent " + shape_string(k.shape) +
                                        " does not match input " + shape_string(x.shape));
  const Index Ci = x.shape[0], T = x.shape[1];
  const Index Co = k.shape[0], kw = k.shape[2];
  if (same_padding) require(kw % 2 == 1, "conv1d: same padding needs an odd kernel extent");
  const Index pad = same_padding ? kw / 2 : 0;
  const Index Tout = same_padding ? T : T - kw + 1;
  require(Tout >= 1, "conv1d: kernel longer than input in valid mode");
  const Index F = Ci * kw;

  auto cols = std::make_shared<RowMatrix>(Tout, F);
  for (Index to = 0; to < Tout; ++to) {
    for (Index ci = 0; ci < Ci; ++ci) {
      for (Index d = 0; d < kw; ++d) {
        const Index ti = to + d - pad;
        (*cols)(to, ci * kw + d) = (ti >= 0 && ti < T) ? x.at(ci, ti) : 0.0;
      }
    }
  }

  Tensor out = Tensor::zeros({Co, Tout});
  MapRM(out.data.data(), Co, Tout).noalias() = cmap2(k, Co, F) * cols->transpose();
  return t.emplace(std::move(out), {input.node, kernels.node},
                   [input = input.node, kernels = kernels.node, cols, Ci, T, Co, kw, pad, F,
                    Tout](Tape& t, Index self) {
                     CMapRM g(t.grad_ref(self).data.data(), Co, Tout);
                     if (t.needs_grad(kernels)) {
                       MapRM dk(t.grad_ref(kernels).data.data(), Co, F);
                       dk.noalias() += g * (*cols);
                     }
                     if (t.needs_grad(input)) {
                       RowMatrix dcols = g.transpose() * cmap2(t.value_of(kernels), Co, F);
                       Tensor& dx = t.grad_ref(input);
                       for (Index to = 0; to < Tout; ++to) {
                         for (Index ci = 0; ci < Ci; ++ci) {
                           for (Index d = 0; d < kw; ++d) {
                             const Index ti = to + d - pad;
                             if (ti < 0 || ti >= T) continue;
                             dx.at(ci, ti) += dcols(to, ci * kw + d);
                           }
                         }
                       }
                     }
                   });
}

Value bias_channels(Tape& t, Value input, Value bias) {
  const Tensor& x = t.value(input);
  const Tensor& b = t.value(bias);
  require(x.rank() >= 2, "bias_channels: input must have a channel axis");
  require_rank(b, 1, "bias_channels bias");
  require(b.shape[0] == x.shape[0], "bias_channels: bias length does not match channels");
  const Index C = x.shape[0];
  const Index span = x.size() / C;
  Tensor out = x;
  for (Index c = 0; c < C; ++c) out.data.segment(c * span, span) += b.data[c];
  return t.emplace(std::move(out), {input.node, bias.node},
                   [input = input.node, bias = bias.node, C, span](Tape& t, Index self) {
                     const Eigen::ArrayXd& g = t.grad_ref(self).data;
                     if (t.needs_grad(input)) t.grad_ref(input).data += g;
                     if (t.needs_grad(bias)) {
                       Tensor& db = t.grad_ref(bias);
                       for (Index c = 0; c < C; ++c) db.data[c] += g.segment(c * span, span).sum();
                     }
                   });
}

Value maxpool2d(Tape& t, Value input) {
  const Tensor& x = t.value(input);
  require_rank(x, 3, "maxpool2d");
  const Index C = x.shape[0], H = x.shape[1], W = x.shape[2];
  require(H >= 2 && W >= 2, "maxpool2d: spatial extents must be at least 2");
  const Index H2 = H / 2, W2 = W / 2;
  Tensor out = Tensor::zeros({C, H2, W2});
  auto argmax = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(C * H2 * W2));
  Index o = 0;
  for (Index c = 0; c < C; ++c) {
    for (Index y = 0; y < H2; ++y) {
      for (Index xx = 0; xx < W2; ++xx) {
        double best = x.at(c, 2 * y, 2 * xx);
        Index best_at = (c * H + 2 * y) * W + 2 * xx;
        for (Index dy = 0; dy < 2; ++dy) {
          for (Index dx = 0; dx < 2; ++dx) {
            const double v = x.at(c, 2 * y + dy, 2 * xx + dx);
            if (v > best) {
              best = v;
              best_at = (c * H + 2 * y + dy) * W + 2 * xx + dx;
            }
          }
        }
        out.data[o] = best;
        (*argmax)[static_cast<std::size_t>(o)] = best_at;
        ++o;
      }
    }
  }
  return t.emplace(std::move(out), {input.node},
                   [input = input.node, argmax](Tape& t, Index self) {
                     if (!t.needs_grad(input)) return;
                     const Eigen::ArrayXd& g = t.grad_ref(self).data;
                     Tensor& dx = t.grad_ref(input);
                     for (Index i = 0; i < g.size(); ++i)
                       dx.data[(*argmax)[static_cast<std::size_t>(i)]] += g[i];
                   });
}

Value maxpool1d(Tape& t, Value input) {
  const Tensor& x = t.value(input);
  require_rank(x, 2, "maxpool1d");
  const Index C = x.shape[0], T = x.shape[1];
  require(T >= 2, "maxpool1d: time extent must be at least 2");
  const Index T2 = T / 2;
  Tensor out = Tensor::zeros({C, T2});
  auto argmax = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(C * T2));
  Index o = 0;
  for (Index c = 0; c < C; ++c) {
    for (Index tt = 0; tt < T2; ++tt) {
      const double v0 = x.at(c, 2 * tt);
      const double v1 = x.at(c, 2 * tt + 1);
      out.data[o] = v0 >= v1 ? v0 : v1;
      (*argmax)[static_cast<std::size_t>(o)] = c * T + 2 * tt + (v0 >= v1 ? 0 : 1);
      ++o;
    }
  }
  return t.emplace(std::move(out), {input.node},
                   [input = input.node, argmax](Tape& t, Index self) {
                     if (!t.needs_grad(input)) return;
                     const Eigen::ArrayXd& g = t.grad_ref(self).data;
                     Tensor& dx = t.grad_ref(input);
                     for (Index i = 0; i < g.size(); ++i)
                       dx.data[(*argmax)[static_cast<std::size_t>(i)]] += g[i];
                   });
}

Value upsample1d(Tape& t, Value input, Index factor) {
  const Tensor& x = t.value(input);
  require_rank(x, 2, "upsample1d");
  require(factor >= 1, "upsample1d: factor must be at least 1");
  const Index C = x.shape[0], T = x.shape[1];
  Tensor out = Tensor::zeros({C, T * factor});
  for (Index c = 0; c < C; ++c)
    for (Index tt = 0; tt < T * factor; ++tt) out.at(c, tt) = x.at(c, tt / factor);
  return t.emplace(std::move(out), {input.node},
                   [input = input.node, factor, C, T](Tape& t, Index self) {
                     if (!t.needs_grad(input)) return;
                     const Tensor& g = t.grad_ref(self);
                     Tensor& dx = t.grad_ref(input);
                     for (Index c = 0; c < C; ++c)
                       for (Index tt = 0; tt < T * factor; ++tt)
                         dx.at(c, tt / factor) += g.at(c, tt);
                   });
}

Value mean_over_time(Tape& t, Value input) {
  const Tensor& x = t.value(input);
  require_rank(x, 2, "mean_over_time");
  const Index C = x.shape[0], T = x.shape[1];
  Tensor out = Tensor::zeros({C});
  for (Index c = 0; c < C; ++c) out.data[c] = x.data.segment(c * T, T).mean();
  return t.emplace(std::move(out), {input.node},
                   [input = input.node, C, T](Tape& t, Index self) {
                     if (!t.needs_grad(input)) return;
                     const Eigen::ArrayXd& g = t.grad_ref(self).data;
                     Tensor& dx = t.grad_ref(input);
                     const double inv = 1.0 / static_cast<double>(T);
                     for (Index c = 0; c < C; ++c)
                       dx.data.segment(c * T, T) += g[c] * inv;
                   });
}

// ---- classifier pieces ----

Value softmax(Tape& t, Value logits) {
  const Tensor& x = t.value(logits);
  require(x.size() >= 1, "softmax: empty input");
  Tensor out = x;
  const double m = out.data.maxCoeff();
  out.data = (out.data - m).exp();
  out.data /= out.data.sum();
  return t.emplace(std::move(out), {logits.node}, [logits = logits.node](Tape& t, Index self) {
    if (!t.needs_grad(logits)) return;
    const Eigen::ArrayXd& y = t.value_of(self).data;
    const Eigen::ArrayXd& g = t.grad_ref(self).data;
    const double dot = (g * y).sum();
    t.grad_ref(logits).data += y * (g - dot);
  });
}

Value softmax_crossentropy(Tape& t, Value logits, Index target) {
  const Tensor& x = t.value(logits);
  const Index K = x.size();
  require(K >= 2, "softmax_crossentropy: need at least 2 classes");
  require(target >= 0 && target < K, "softmax_crossentropy: target class out of range");
  const double m = x.data.maxCoeff();
  const Eigen::ArrayXd shifted = x.data - m;
  const double lse = std::log(shifted.exp().sum());
  Tensor out = Tensor::scalar(lse - shifted[target]);
  return t.emplace(std::move(out), {logits.node},
                   [logits = logits.node, target, probs = Eigen::ArrayXd((shifted - lse).exp())](
                       Tape& t, Index self) {
                     if (!t.needs_grad(logits)) return;
                     const double g = t.grad_ref(self).data[0];
                     Eigen::ArrayXd d = probs;
                     d[target] -= 1.0;
                     t.grad_ref(logits).data += g * d;
                   });
}

Value dropout(Tape& t, Value input, double rate, Rng& rng, bool training) {
  require(rate >= 0.0 && rate < 1.0, "dropout: rate must lie in [0, 1)");
  if (!training || rate == 0.0) return input;
  const Tensor& x = t.value(input);
  Eigen::ArrayXd mask(x.size());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Index i = 0; i < x.size(); ++i)
    mask[i] = rng.uniform() >= rate ? keep_scale : 0.0;
  Tensor out = x;
  out.data *= mask;
  return t.emplace(std::move(out), {input.node},
                   [input = input.node, mask = std::move(mask)](Tape& t, Index self) {
                     if (t.needs_grad(input))
                       t.grad_ref(input).data += mask * t.grad_ref(self).data;
                   });
}

}  // namespace aircast
