#include "autosign/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace autosign {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

// Lane decomposition for axis-wise reductions: shape = outer × len × inner.
struct Lanes {
  Index outer, len, inner;
};

Lanes lanes_for(const Shape& shape, int axis) {
  if (axis < 0 || axis >= static_cast<int>(shape.size()))
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape));
  Lanes l{1, shape[static_cast<std::size_t>(axis)], 1};
  for (int i = 0; i < axis; ++i) l.outer *= shape[static_cast<std::size_t>(i)];
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < shape.size(); ++i)
    l.inner *= shape[i];
  return l;
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2,
          "matmul expects rank-2 tensors, got " + shape_str(a.shape()) + " and " +
              shape_str(b.shape()));
  require(a.dim(1) == b.dim(0), "matmul inner extents disagree: " + shape_str(a.shape()) +
                                    " vs " + shape_str(b.shape()));
  const Index m = a.dim(0), n = b.dim(1);
  Tensor c = Tensor::zeros({m, n});
  c.mat().noalias() = a.mat() * b.mat();
  tape.record({a, b}, c, [a, b, c]() mutable {
    ConstMatMap dc(c.grad_data(), c.dim(0), c.dim(1));
    if (a.requires_grad()) a.grad_mat().noalias() += dc * b.mat().transpose();
    if (b.requires_grad()) b.grad_mat().noalias() += a.mat().transpose() * dc;
  });
  return c;
}

Tensor conv1d(Tape& tape, const Tensor& input, const Tensor& weight,
              const Tensor& bias, Index stride, Index padding) {
  require(input.rank() == 2, "conv1d input must be [C_in×L], got " + shape_str(input.shape()));
  require(weight.rank() == 3,
          "conv1d weight must be [C_out×C_in×k], got " + shape_str(weight.shape()));
  const Index c_in = input.dim(0), len = input.dim(1);
  const Index c_out = weight.dim(0), kernel = weight.dim(2);
  require(weight.dim(1) == c_in, "conv1d channel mismatch: input " + shape_str(input.shape()) +
                                     ", weight " + shape_str(weight.shape()));
  require(bias.rank() == 1 && bias.dim(0) == c_out,
          "conv1d bias must be [C_out], got " + shape_str(bias.shape()));
  if (stride < 1 || padding < 0) throw ShapeError("conv1d needs stride >= 1, padding >= 0");
  const Index out_len = conv1d_out_len(len, kernel, stride, padding);
  if (out_len < 1)
    throw DataError("conv1d: sequence too short (L=" + std::to_string(len) + ", k=" +
                    std::to_string(kernel) + ", padding=" + std::to_string(padding) + ")");

  // im2col: columns hold one receptive field each, zeros outside [0, L).
  Tensor cols = Tensor::zeros({c_in * kernel, out_len});
  {
    MatMap cm = cols.mat();
    MatMap xm = input.mat();
    for (Index t = 0; t < out_len; ++t) {
      const Index base = t * stride - padding;
      for (Index k = 0; k < kernel; ++k) {
        const Index src = base + k;
        if (src < 0 || src >= len) continue;
        for (Index ci = 0; ci < c_in; ++ci) cm(ci * kernel + k, t) = xm(ci, src);
      }
    }
  }

  Tensor out = Tensor::zeros({c_out, out_len});
  ConstMatMap wm(weight.data(), c_out, c_in * kernel);
  out.mat().noalias() = wm * cols.mat();
  out.mat().colwise() += ConstVecMap(bias.data(), c_out);

  tape.record({input, weight, bias}, out,
              [input, weight, bias, cols, out, stride, padding]() mutable {
                const Index c_in = input.dim(0), len = input.dim(1);
                const Index c_out = weight.dim(0), kernel = weight.dim(2);
                const Index out_len = out.dim(1);
                ConstMatMap dy(out.grad_data(), c_out, out_len);
                if (bias.requires_grad())
                  VecMap(bias.grad(), c_out) += dy.rowwise().sum();
                if (weight.requires_grad()) {
                  MatMap dw(weight.grad(), c_out, c_in * kernel);
                  dw.noalias() += dy * cols.mat().transpose();
                }
                if (input.requires_grad()) {
                  ConstMatMap wm(weight.data(), c_out, c_in * kernel);
                  RowMat dcols = wm.transpose() * dy;  // [C_in·k × L_out]
                  MatMap dx(input.grad(), c_in, len);
                  for (Index t = 0; t < out_len; ++t) {
                    const Index base = t * stride - padding;
                    for (Index k = 0; k < kernel; ++k) {
                      const Index src = base + k;
                      if (src < 0 || src >= len) continue;
                      for (Index ci = 0; ci < c_in; ++ci)
                        dx(ci, src) += dcols(ci * kernel + k, t);
                    }
                  }
                }
              });
  return out;
}

Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gamma,
                  const Tensor& beta, double eps) {
  require(x.rank() >= 1, "layer_norm needs rank >= 1");
  const Index d = x.shape().back();
  require(d >= 1, "layer_norm needs a non-empty last axis");
  require(gamma.rank() == 1 && gamma.dim(0) == d && beta.rank() == 1 && beta.dim(0) == d,
          "layer_norm gamma/beta must be [d]");
  const Index rows = x.numel() / d;

  Tensor y = Tensor::zeros(x.shape());
  Tensor xhat = Tensor::zeros(x.shape());
  Tensor inv_std = Tensor::zeros({rows});
  {
    ConstMatMap xm(x.data(), rows, d);
    MatMap ym(y.data(), rows, d);
    MatMap hm(xhat.data(), rows, d);
    ConstVecMap g(gamma.data(), d), b(beta.data(), d);
    for (Index r = 0; r < rows; ++r) {
      const double mu = xm.row(r).mean();
      const double var = (xm.row(r).array() - mu).square().mean();
      const double is = 1.0 / std::sqrt(var + eps);
      inv_std.data()[r] = is;
      hm.row(r) = (xm.row(r).array() - mu) * is;
      ym.row(r) = hm.row(r).cwiseProduct(g.transpose()) + b.transpose();
    }
  }

  tape.record({x, gamma, beta}, y, [x, gamma, beta, y, xhat, inv_std]() mutable {
    const Index d = x.shape().back();
    const Index rows = x.numel() / d;
    ConstMatMap dy(y.grad_data(), rows, d);
    ConstMatMap hm(xhat.data(), rows, d);
    ConstVecMap g(gamma.data(), d);
    if (gamma.requires_grad())
      VecMap(gamma.grad(), d) += (dy.array() * hm.array()).colwise().sum().matrix();
    if (beta.requires_grad()) VecMap(beta.grad(), d) += dy.colwise().sum();
    if (x.requires_grad()) {
      MatMap dx(x.grad(), rows, d);
      for (Index r = 0; r < rows; ++r) {
        Eigen::ArrayXd dxhat = dy.row(r).transpose().array() * g.array();
        const double m1 = dxhat.mean();
        const double m2 = (dxhat * hm.row(r).transpose().array()).mean();
        dx.row(r) += (inv_std.data()[r] *
                      (dxhat - m1 - hm.row(r).transpose().array() * m2))
                         .matrix()
                         .transpose();
      }
    }
  });
  return y;
}

Tensor softmax(Tape& tape, const Tensor& x, int axis) {
  const Lanes l = lanes_for(x.shape(), axis);
  Tensor y = Tensor::zeros(x.shape());
  const double* xd = x.data();
  double* yd = y.data();
  for (Index o = 0; o < l.outer; ++o) {
    for (Index i = 0; i < l.inner; ++i) {
      const Index base = o * l.len * l.inner + i;
      double mx = -std::numeric_limits<double>::infinity();
      for (Index j = 0; j < l.len; ++j) mx = std::max(mx, xd[base + j * l.inner]);
      double denom = 0.0;
      for (Index j = 0; j < l.len; ++j) {
        const double e = std::exp(xd[base + j * l.inner] - mx);
        yd[base + j * l.inner] = e;
        denom += e;
      }
      for (Index j = 0; j < l.len; ++j) yd[base + j * l.inner] /= denom;
    }
  }
  tape.record({x}, y, [x, y, l]() mutable {
    const double* yd = y.data();
    const double* gy = y.grad_data();
    double* gx = x.grad();
    for (Index o = 0; o < l.outer; ++o) {
      for (Index i = 0; i < l.inner; ++i) {
        const Index base = o * l.len * l.inner + i;
        double dot = 0.0;
        for (Index j = 0; j < l.len; ++j) {
          const Index k = base + j * l.inner;
          dot += gy[k] * yd[k];
        }
        for (Index j = 0; j < l.len; ++j) {
          const Index k = base + j * l.inner;
          gx[k] += yd[k] * (gy[k] - dot);
        }
      }
    }
  });
  return y;
}

Tensor log_softmax(Tape& tape, const Tensor& x, int axis) {
  const Lanes l = lanes_for(x.shape(), axis);
  Tensor y = Tensor::zeros(x.shape());
  const double* xd = x.data();
  double* yd = y.data();
  for (Index o = 0; o < l.outer; ++o) {
    for (Index i = 0; i < l.inner; ++i) {
      const Index base = o * l.len * l.inner + i;
      double mx = -std::numeric_limits<double>::infinity();
      for (Index j = 0; j < l.len; ++j) mx = std::max(mx, xd[base + j * l.inner]);
      double denom = 0.0;
      for (Index j = 0; j < l.len; ++j) denom += std::exp(xd[base + j * l.inner] - mx);
      const double lse = mx + std::log(denom);
      for (Index j = 0; j < l.len; ++j) {
        const Index k = base + j * l.inner;
        yd[k] = xd[k] - lse;
      }
    }
  }
  tape.record({x}, y, [x, y, l]() mutable {
    const double* yd = y.data();
    const double* gy = y.grad_data();
    double* gx = x.grad();
    for (Index o = 0; o < l.outer; ++o) {
      for (Index i = 0; i < l.inner; ++i) {
        const Index base = o * l.len * l.inner + i;
        double total = 0.0;
        for (Index j = 0; j < l.len; ++j) total += gy[base + j * l.inner];
        for (Index j = 0; j < l.len; ++j) {
          const Index k = base + j * l.inner;
          gx[k] += gy[k] - std::exp(yd[k]) * total;
        }
      }
    }
  });
  return y;
}

Tensor embedding_lookup(Tape& tape, const Tensor& table, const std::vector<int>& ids) {
  require(table.rank() == 2, "embedding table must be [V×d]");
  const Index v = table.dim(0), d = table.dim(1);
  for (int id : ids) {
    if (id < 0 || id >= v)
      throw ShapeError("embedding id " + std::to_string(id) + " out of range [0," +
                       std::to_string(v) + ")");
  }
  const Index n = static_cast<Index>(ids.size());
  Tensor y = Tensor::zeros({n, d});
  MatMap tm = table.mat();
  MatMap ym = y.mat();
  for (Index i = 0; i < n; ++i) ym.row(i) = tm.row(ids[static_cast<std::size_t>(i)]);
  tape.record({table}, y, [table, y, ids]() mutable {
    ConstMatMap dy(y.grad_data(), y.dim(0), y.dim(1));
    MatMap dt = table.grad_mat();
    for (Index i = 0; i < y.dim(0); ++i)
      dt.row(ids[static_cast<std::size_t>(i)]) += dy.row(i);
  });
  return y;
}

Tensor masked_cross_entropy(Tape& tape, const Tensor& logits,
                            const std::vector<int>& targets, int pad_id) {
  require(logits.rank() == 2 || logits.rank() == 3,
          "masked_cross_entropy expects [B×T×V] or [N×V] logits");
  const Index v = logits.shape().back();
  const Index rows = logits.numel() / v;
  require(rows == static_cast<Index>(targets.size()),
          "targets length " + std::to_string(targets.size()) + " does not match " +
              std::to_string(rows) + " logit rows");
  Index n_real = 0;
  for (int t : targets) {
    if (t == pad_id) continue;
    if (t < 0 || t >= v)
      throw ShapeError("target id " + std::to_string(t) + " out of range [0," +
                       std::to_string(v) + ")");
    ++n_real;
  }
  if (n_real == 0) throw DataError("masked_cross_entropy: no non-pad targets");

  // Per-row probabilities are kept for the backward rule; pad rows stay zero
  // so their logits never influence loss or gradient.
  Tensor probs = Tensor::zeros({rows, v});
  double total = 0.0;
  {
    ConstMatMap lm(logits.data(), rows, v);
    MatMap pm = probs.mat();
    for (Index r = 0; r < rows; ++r) {
      const int t = targets[static_cast<std::size_t>(r)];
      if (t == pad_id) continue;
      const double mx = lm.row(r).maxCoeff();
      Eigen::ArrayXd e = (lm.row(r).transpose().array() - mx).exp();
      const double denom = e.sum();
      pm.row(r) = (e / denom).matrix().transpose();
      total += mx + std::log(denom) - lm(r, t);
    }
  }
  Tensor loss = Tensor::scalar_value(total / static_cast<double>(n_real));
  tape.record({logits}, loss, [logits, loss, probs, targets, pad_id, n_real]() mutable {
    const Index v = logits.shape().back();
    const Index rows = logits.numel() / v;
    const double g = loss.grad_data()[0] / static_cast<double>(n_real);
    MatMap dl(logits.grad(), rows, v);
    ConstMatMap pm(probs.data(), rows, v);
    for (Index r = 0; r < rows; ++r) {
      const int t = targets[static_cast<std::size_t>(r)];
      if (t == pad_id) continue;
      dl.row(r) += g * pm.row(r);
      dl(r, t) -= g;
    }
  });
  return loss;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "add shape mismatch: " + shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
  Tensor y = Tensor::zeros(a.shape());
  y.vec() = a.vec() + b.vec();
  tape.record({a, b}, y, [a, b, y]() mutable {
    ConstVecMap dy(y.grad_data(), y.numel());
    if (a.requires_grad()) a.grad_vec() += dy;
    if (b.requires_grad()) b.grad_vec() += dy;
  });
  return y;
}

Tensor add_rowwise(Tape& tape, const Tensor& x, const Tensor& bias) {
  const Index d = x.shape().back();
  require(bias.rank() == 1 && bias.dim(0) == d,
          "add_rowwise bias must match last axis " + std::to_string(d));
  const Index rows = x.numel() / d;
  Tensor y = Tensor::zeros(x.shape());
  MatMap(y.data(), rows, d) = ConstMatMap(x.data(), rows, d);
  MatMap(y.data(), rows, d).rowwise() += ConstVecMap(bias.data(), d).transpose();
  tape.record({x, bias}, y, [x, bias, y]() mutable {
    const Index d = x.shape().back();
    const Index rows = x.numel() / d;
    ConstMatMap dy(y.grad_data(), rows, d);
    if (x.requires_grad()) MatMap(x.grad(), rows, d) += dy;
    if (bias.requires_grad()) VecMap(bias.grad(), d) += dy.colwise().sum();
  });
  return y;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "mul shape mismatch: " + shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
  Tensor y = Tensor::zeros(a.shape());
  y.vec() = a.vec().cwiseProduct(b.vec());
  tape.record({a, b}, y, [a, b, y]() mutable {
    ConstVecMap dy(y.grad_data(), y.numel());
    if (a.requires_grad()) a.grad_vec() += dy.cwiseProduct(b.vec());
    if (b.requires_grad()) b.grad_vec() += dy.cwiseProduct(a.vec());
  });
  return y;
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  Tensor y = Tensor::zeros(x.shape());
  y.vec() = factor * x.vec();
  tape.record({x}, y, [x, y, factor]() mutable {
    x.grad_vec() += factor * ConstVecMap(y.grad_data(), y.numel());
  });
  return y;
}

Tensor gelu(Tape& tape, const Tensor& x) {
  Tensor y = Tensor::zeros(x.shape());
  const double* xd = x.data();
  double* yd = y.data();
  const Index n = x.numel();
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  for (Index i = 0; i < n; ++i)
    yd[i] = 0.5 * xd[i] * (1.0 + std::erf(xd[i] * kInvSqrt2));
  tape.record({x}, y, [x, y]() mutable {
    const double* xd = x.data();
    const double* gy = y.grad_data();
    double* gx = x.grad();
    constexpr double kInvSqrt2 = 0.7071067811865475244;
    constexpr double kInvSqrt2Pi = 0.3989422804014326779;
    for (Index i = 0; i < x.numel(); ++i) {
      const double cdf = 0.5 * (1.0 + std::erf(xd[i] * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * xd[i] * xd[i]);
      gx[i] += gy[i] * (cdf + xd[i] * pdf);
    }
  });
  return y;
}

Tensor dropout(Tape& tape, const Tensor& x, double p, RngStream& rng, bool training) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must be in [0,1)");
  if (!training || p == 0.0) return x;
  const Index n = x.numel();
  const double keep = 1.0 - p;
  std::vector<double> mask(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    mask[static_cast<std::size_t>(i)] = rng.uniform() < keep ? 1.0 / keep : 0.0;
  Tensor y = Tensor::zeros(x.shape());
  for (Index i = 0; i < n; ++i) y.data()[i] = x.data()[i] * mask[static_cast<std::size_t>(i)];
  tape.record({x}, y, [x, y, mask = std::move(mask)]() mutable {
    const double* gy = y.grad_data();
    double* gx = x.grad();
    for (Index i = 0; i < x.numel(); ++i) gx[i] += gy[i] * mask[static_cast<std::size_t>(i)];
  });
  return y;
}

Tensor transpose(Tape& tape, const Tensor& x) {
  require(x.rank() == 2, "transpose expects rank 2, got " + shape_str(x.shape()));
  Tensor y = Tensor::zeros({x.dim(1), x.dim(0)});
  y.mat() = x.mat().transpose();
  tape.record({x}, y, [x, y]() mutable {
    x.grad_mat() += ConstMatMap(y.grad_data(), y.dim(0), y.dim(1)).transpose();
  });
  return y;
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  require(shape_numel(shape) == x.numel(),
          "reshape to " + shape_str(shape) + " changes element count");
  Tensor y = Tensor::zeros(shape);
  y.vec() = x.vec();
  tape.record({x}, y, [x, y]() mutable {
    x.grad_vec() += ConstVecMap(y.grad_data(), y.numel());
  });
  return y;
}

Tensor slice_rows(Tape& tape, const Tensor& x, Index start, Index count) {
  require(x.rank() == 2, "slice_rows expects rank 2");
  require(start >= 0 && count >= 0 && start + count <= x.dim(0),
          "slice_rows range out of bounds");
  Tensor y = Tensor::zeros({count, x.dim(1)});
  y.mat() = x.mat().middleRows(start, count);
  tape.record({x}, y, [x, y, start, count]() mutable {
    x.grad_mat().middleRows(start, count) +=
        ConstMatMap(y.grad_data(), count, x.dim(1));
  });
  return y;
}

Tensor slice_cols(Tape& tape, const Tensor& x, Index start, Index count) {
  require(x.rank() == 2, "slice_cols expects rank 2");
  require(start >= 0 && count >= 0 && start + count <= x.dim(1),
          "slice_cols range out of bounds");
  Tensor y = Tensor::zeros({x.dim(0), count});
  y.mat() = x.mat().middleCols(start, count);
  tape.record({x}, y, [x, y, start, count]() mutable {
    x.grad_mat().middleCols(start, count) +=
        ConstMatMap(y.grad_data(), x.dim(0), count);
  });
  return y;
}

Tensor concat_rows(Tape& tape, const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_rows needs at least one part");
  const Index cols = parts.front().rank() == 2 ? parts.front().dim(1) : -1;
  require(cols >= 0, "concat_rows expects rank-2 parts");
  Index rows = 0;
  for (const Tensor& p : parts) {
    require(p.rank() == 2 && p.dim(1) == cols, "concat_rows column mismatch");
    rows += p.dim(0);
  }
  Tensor y = Tensor::zeros({rows, cols});
  Index at = 0;
  for (const Tensor& p : parts) {
    y.mat().middleRows(at, p.dim(0)) = p.mat();
    at += p.dim(0);
  }
  tape.record(parts, y, [parts, y]() mutable {
    ConstMatMap dy(y.grad_data(), y.dim(0), y.dim(1));
    Index at = 0;
    for (const Tensor& p : parts) {
      if (p.requires_grad()) p.grad_mat() += dy.middleRows(at, p.dim(0));
      at += p.dim(0);
    }
  });
  return y;
}

Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_cols needs at least one part");
  const Index rows = parts.front().rank() == 2 ? parts.front().dim(0) : -1;
  require(rows >= 0, "concat_cols expects rank-2 parts");
  Index cols = 0;
  for (const Tensor& p : parts) {
    require(p.rank() == 2 && p.dim(0) == rows, "concat_cols row mismatch");
    cols += p.dim(1);
  }
  Tensor y = Tensor::zeros({rows, cols});
  Index at = 0;
  for (const Tensor& p : parts) {
    y.mat().middleCols(at, p.dim(1)) = p.mat();
    at += p.dim(1);
  }
  tape.record(parts, y, [parts, y]() mutable {
    ConstMatMap dy(y.grad_data(), y.dim(0), y.dim(1));
    Index at = 0;
    for (const Tensor& p : parts) {
      if (p.requires_grad()) p.grad_mat() += dy.middleCols(at, p.dim(1));
      at += p.dim(1);
    }
  });
  return y;
}

Tensor sum(Tape& tape, const Tensor& x) {
  Tensor y = Tensor::scalar_value(x.vec().sum());
  tape.record({x}, y, [x, y]() mutable {
    x.grad_vec().array() += y.grad_data()[0];
  });
  return y;
}

Tensor mean(Tape& tape, const Tensor& x) {
  require(x.numel() > 0, "mean of empty tensor");
  Tensor y = Tensor::scalar_value(x.vec().mean());
  tape.record({x}, y, [x, y]() mutable {
    x.grad_vec().array() += y.grad_data()[0] / static_cast<double>(x.numel());
  });
  return y;
}

Tensor logaddexp(Tape& tape, const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "logaddexp shape mismatch");
  const Index n = a.numel();
  Tensor y = Tensor::zeros(a.shape());
  for (Index i = 0; i < n; ++i) {
    const double av = a.data()[i], bv = b.data()[i];
    const double mx = std::max(av, bv);
    if (std::isinf(mx) && mx < 0) {
      y.data()[i] = mx;  // both -inf
    } else {
      y.data()[i] = mx + std::log(std::exp(av - mx) + std::exp(bv - mx));
    }
  }
  tape.record({a, b}, y, [a, b, y]() mutable {
    const double* gy = y.grad_data();
    for (Index i = 0; i < y.numel(); ++i) {
      const double yv = y.data()[i];
      if (std::isinf(yv) && yv < 0) continue;  // impossible branch, no gradient
      if (a.requires_grad()) a.grad()[i] += gy[i] * std::exp(a.data()[i] - yv);
      if (b.requires_grad()) b.grad()[i] += gy[i] * std::exp(b.data()[i] - yv);
    }
  });
  return y;
}

}  // namespace autosign
