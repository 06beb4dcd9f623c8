#include "mtsum/autograd.hpp"

#include <cmath>
#include <stdexcept>

#include "mtsum/kernels.hpp"

namespace mtsum::nn {

void Tape::backward(Var loss) {
  if (loss.rows() != 1 || loss.cols() != 1)
    throw std::invalid_argument("backward: loss must be a 1x1 scalar");
  loss.grad()(0, 0) += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

Var matmul(Tape* t, Var a, Var b, bool ta, bool tb) {
  Mat out;
  kernels::matmul(a.val(), ta, b.val(), tb, out);
  Var o(std::move(out));
  if (t) t->record([a, b, o, ta, tb]() mutable {
    const Mat& g = o.grad();
    if (!ta && !tb) {
      kernels::matmul_acc(g, false, b.val(), true, a.grad());
      kernels::matmul_acc(a.val(), true, g, false, b.grad());
    } else if (ta && !tb) {
      kernels::matmul_acc(b.val(), false, g, true, a.grad());
      kernels::matmul_acc(a.val(), false, g, false, b.grad());
    } else if (!ta && tb) {
      kernels::matmul_acc(g, false, b.val(), false, a.grad());
      kernels::matmul_acc(g, true, a.val(), false, b.grad());
    } else {
      kernels::matmul_acc(b.val(), true, g, true, a.grad());
      kernels::matmul_acc(g, true, a.val(), true, b.grad());
    }
  });
  return o;
}

Var add(Tape* t, Var a, Var b) {
  if (!a.val().same_shape(b.val())) throw std::invalid_argument("add: shape mismatch");
  Mat out = a.val();
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] += b.val().data()[i];
  Var o(std::move(out));
  if (t) t->record([a, b, o]() mutable {
    for (size_t i = 0; i < o.grad().size(); ++i) {
      a.grad().data()[i] += o.grad().data()[i];
      b.grad().data()[i] += o.grad().data()[i];
    }
  });
  return o;
}

Var add_rowvec(Tape* t, Var a, Var b) {
  if (b.rows() != 1 || b.cols() != a.cols())
    throw std::invalid_argument("add_rowvec: b must be 1 x a.cols()");
  Mat out = a.val();
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out(r, c) += b.val()(0, c);
  Var o(std::move(out));
  if (t) t->record([a, b, o]() mutable {
    for (int r = 0; r < o.rows(); ++r)
      for (int c = 0; c < o.cols(); ++c) {
        a.grad()(r, c) += o.grad()(r, c);
        b.grad()(0, c) += o.grad()(r, c);
      }
  });
  return o;
}

Var mul(Tape* t, Var a, Var b) {
  if (!a.val().same_shape(b.val())) throw std::invalid_argument("mul: shape mismatch");
  Mat out = a.val();
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.val().data()[i];
  Var o(std::move(out));
  if (t) t->record([a, b, o]() mutable {
    for (size_t i = 0; i < o.grad().size(); ++i) {
      a.grad().data()[i] += o.grad().data()[i] * b.val().data()[i];
      b.grad().data()[i] += o.grad().data()[i] * a.val().data()[i];
    }
  });
  return o;
}

Var scale(Tape* t, Var a, double s) {
  Mat out = a.val();
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
  Var o(std::move(out));
  if (t) t->record([a, o, s]() mutable {
    for (size_t i = 0; i < o.grad().size(); ++i) a.grad().data()[i] += s * o.grad().data()[i];
  });
  return o;
}

Var tanh_op(Tape* t, Var a) {
  Mat out = a.val();
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = std::tanh(out.data()[i]);
  Var o(std::move(out));
  if (t) t->record([a, o]() mutable {
    for (size_t i = 0; i < o.grad().size(); ++i) {
      const double y = o.val().data()[i];
      a.grad().data()[i] += o.grad().data()[i] * (1.0 - y * y);
    }
  });
  return o;
}

Var sigmoid(Tape* t, Var a) {
  Mat out = a.val();
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = 1.0 / (1.0 + std::exp(-out.data()[i]));
  Var o(std::move(out));
  if (t) t->record([a, o]() mutable {
    for (size_t i = 0; i < o.grad().size(); ++i) {
      const double y = o.val().data()[i];
      a.grad().data()[i] += o.grad().data()[i] * y * (1.0 - y);
    }
  });
  return o;
}

Var gelu(Tape* t, Var a) {
  static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  static const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * M_PI);
  Mat out = a.val();
  for (size_t i = 0; i < out.size(); ++i) {
    const double x = out.data()[i];
    out.data()[i] = 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
  }
  Var o(std::move(out));
  if (t) t->record([a, o]() mutable {
    for (size_t i = 0; i < o.grad().size(); ++i) {
      const double x = a.val().data()[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
      const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
      a.grad().data()[i] += o.grad().data()[i] * (cdf + x * pdf);
    }
  });
  return o;
}

namespace {

void softmax_row_inplace(double* row, int n) {
  double mx = row[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, row[i]);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    row[i] = std::exp(row[i] - mx);
    sum += row[i];
  }
  for (int i = 0; i < n; ++i) row[i] /= sum;
}

}  // namespace

Var softmax_rows(Tape* t, Var a) {
  Mat out = a.val();
  for (int r = 0; r < out.rows(); ++r) softmax_row_inplace(&out(r, 0), out.cols());
  Var o(std::move(out));
  if (t) t->record([a, o]() mutable {
    for (int r = 0; r < o.rows(); ++r) {
      double dot = 0.0;
      for (int c = 0; c < o.cols(); ++c) dot += o.grad()(r, c) * o.val()(r, c);
      for (int c = 0; c < o.cols(); ++c)
        a.grad()(r, c) += o.val()(r, c) * (o.grad()(r, c) - dot);
    }
  });
  return o;
}

Var log_softmax_rows(Tape* t, Var a) {
  Mat out = a.val();
  for (int r = 0; r < out.rows(); ++r) {
    double mx = out(r, 0);
    for (int c = 1; c < out.cols(); ++c) mx = std::max(mx, out(r, c));
    double sum = 0.0;
    for (int c = 0; c < out.cols(); ++c) sum += std::exp(out(r, c) - mx);
    const double lse = mx + std::log(sum);
    for (int c = 0; c < out.cols(); ++c) out(r, c) -= lse;
  }
  Var o(std::move(out));
  if (t) t->record([a, o]() mutable {
    for (int r = 0; r < o.rows(); ++r) {
      double gsum = 0.0;
      for (int c = 0; c < o.cols(); ++c) gsum += o.grad()(r, c);
      for (int c = 0; c < o.cols(); ++c)
        a.grad()(r, c) += o.grad()(r, c) - std::exp(o.val()(r, c)) * gsum;
    }
  });
  return o;
}

Var transpose(Tape* t, Var a) {
  Mat out(a.cols(), a.rows());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out(c, r) = a.val()(r, c);
  Var o(std::move(out));
  if (t) t->record([a, o]() mutable {
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < a.cols(); ++c) a.grad()(r, c) += o.grad()(c, r);
  });
  return o;
}

Var concat_cols(Tape* t, Var a, Var b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row mismatch");
  Mat out(a.rows(), a.cols() + b.cols());
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) out(r, c) = a.val()(r, c);
    for (int c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b.val()(r, c);
  }
  Var o(std::move(out));
  if (t) t->record([a, b, o]() mutable {
    for (int r = 0; r < a.rows(); ++r) {
      for (int c = 0; c < a.cols(); ++c) a.grad()(r, c) += o.grad()(r, c);
      for (int c = 0; c < b.cols(); ++c) b.grad()(r, c) += o.grad()(r, a.cols() + c);
    }
  });
  return o;
}

Var slice_cols(Tape* t, Var a, int c0, int c1) {
  if (c0 < 0 || c1 > a.cols() || c0 >= c1) throw std::invalid_argument("slice_cols: bad range");
  Mat out(a.rows(), c1 - c0);
  for (int r = 0; r < a.rows(); ++r)
    for (int c = c0; c < c1; ++c) out(r, c - c0) = a.val()(r, c);
  Var o(std::move(out));
  if (t) t->record([a, o, c0]() mutable {
    for (int r = 0; r < o.rows(); ++r)
      for (int c = 0; c < o.cols(); ++c) a.grad()(r, c0 + c) += o.grad()(r, c);
  });
  return o;
}

Var mean_rows(Tape* t, Var a) {
  Mat out(1, a.cols());
  const double inv = 1.0 / a.rows();
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out(0, c) += a.val()(r, c) * inv;
  Var o(std::move(out));
  if (t) t->record([a, o, inv]() mutable {
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < a.cols(); ++c) a.grad()(r, c) += o.grad()(0, c) * inv;
  });
  return o;
}

Var gather_rows(Tape* t, Var table, const std::vector<int>& ids) {
  Mat out(static_cast<int>(ids.size()), table.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows())
      throw std::out_of_range("gather_rows: id out of range");
    for (int c = 0; c < table.cols(); ++c) out(static_cast<int>(i), c) = table.val()(ids[i], c);
  }
  Var o(std::move(out));
  if (t) t->record([table, o, ids]() mutable {
    for (size_t i = 0; i < ids.size(); ++i)
      for (int c = 0; c < table.cols(); ++c)
        table.grad()(ids[i], c) += o.grad()(static_cast<int>(i), c);
  });
  return o;
}

Var layer_norm_rows(Tape* t, Var a, Var gain, Var bias, double eps) {
  const int rows = a.rows(), cols = a.cols();
  Mat out(rows, cols);
  Mat xhat(rows, cols);
  std::vector<double> inv_sigma(rows);
  for (int r = 0; r < rows; ++r) {
    double mu = 0.0;
    for (int c = 0; c < cols; ++c) mu += a.val()(r, c);
    mu /= cols;
    double var = 0.0;
    for (int c = 0; c < cols; ++c) {
      const double d = a.val()(r, c) - mu;
      var += d * d;
    }
    var /= cols;
    inv_sigma[r] = 1.0 / std::sqrt(var + eps);
    for (int c = 0; c < cols; ++c) {
      xhat(r, c) = (a.val()(r, c) - mu) * inv_sigma[r];
      out(r, c) = xhat(r, c) * gain.val()(0, c) + bias.val()(0, c);
    }
  }
  Var o(std::move(out));
  if (t) t->record([a, gain, bias, o, xhat, inv_sigma]() mutable {
    const int rows = a.rows(), cols = a.cols();
    for (int r = 0; r < rows; ++r) {
      double mean_h = 0.0, mean_hx = 0.0;
      for (int c = 0; c < cols; ++c) {
        const double h = o.grad()(r, c) * gain.val()(0, c);
        mean_h += h;
        mean_hx += h * xhat(r, c);
        gain.grad()(0, c) += o.grad()(r, c) * xhat(r, c);
        bias.grad()(0, c) += o.grad()(r, c);
      }
      mean_h /= cols;
      mean_hx /= cols;
      for (int c = 0; c < cols; ++c) {
        const double h = o.grad()(r, c) * gain.val()(0, c);
        a.grad()(r, c) += (h - mean_h - xhat(r, c) * mean_hx) * inv_sigma[r];
      }
    }
  });
  return o;
}

Var nll_sum_rows(Tape* t, Var logits, const std::vector<int>& targets) {
  if (static_cast<int>(targets.size()) != logits.rows())
    throw std::invalid_argument("nll_sum_rows: one target per row required");
  const int rows = logits.rows(), cols = logits.cols();
  Mat probs = logits.val();
  double loss = 0.0;
  for (int r = 0; r < rows; ++r) {
    if (targets[r] < 0 || targets[r] >= cols)
      throw std::out_of_range("nll_sum_rows: target out of range");
    softmax_row_inplace(&probs(r, 0), cols);
    loss -= std::log(std::max(probs(r, targets[r]), 1e-300));
  }
  Var o(Mat(1, 1, loss));
  if (t) t->record([logits, o, probs, targets]() mutable {
    const double g = o.grad()(0, 0);
    for (int r = 0; r < logits.rows(); ++r)
      for (int c = 0; c < logits.cols(); ++c) {
        const double onehot = c == targets[r] ? 1.0 : 0.0;
        logits.grad()(r, c) += g * (probs(r, c) - onehot);
      }
  });
  return o;
}

}  // namespace mtsum::nn
