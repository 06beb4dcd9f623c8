#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mtsum/mat.hpp"

namespace mtsum::nn {

struct VarData {
  Mat val;
  Mat grad;
};

// Shared handle to a value/gradient pair. Parameters are long-lived Vars;
// intermediate nodes live as long as the tape that recorded them.
class Var {
 public:
  Var() = default;
  explicit Var(Mat v) : d_(std::make_shared<VarData>()) {
    d_->val = std::move(v);
    d_->grad = Mat(d_->val.rows(), d_->val.cols());
  }
  bool defined() const { return d_ != nullptr; }
  Mat& val() { return d_->val; }
  const Mat& val() const { return d_->val; }
  Mat& grad() { return d_->grad; }
  const Mat& grad() const { return d_->grad; }
  void zero_grad() { d_->grad.set_zero(); }
  int rows() const { return d_->val.rows(); }
  int cols() const { return d_->val.cols(); }
  double scalar() const { return d_->val(0, 0); }

 private:
  std::shared_ptr<VarData> d_;
};

// Records backward closures in forward order; backward() replays them
// reversed. Pass a null Tape* to any op for inference without recording.
class Tape {
 public:
  void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }
  void backward(Var loss);
  void clear() { ops_.clear(); }
  size_t size() const { return ops_.size(); }

 private:
  std::vector<std::function<void()>> ops_;
};

// --- ops (all pure given inputs; record onto t when t != nullptr) ---

// op(a) * op(b) with optional transposes
Var matmul(Tape* t, Var a, Var b, bool ta = false, bool tb = false);
Var add(Tape* t, Var a, Var b);                 // same shape
Var add_rowvec(Tape* t, Var a, Var b);          // b is 1 x cols, broadcast over rows
Var mul(Tape* t, Var a, Var b);                 // elementwise
Var scale(Tape* t, Var a, double s);
Var tanh_op(Tape* t, Var a);
Var sigmoid(Tape* t, Var a);
Var gelu(Tape* t, Var a);
Var softmax_rows(Tape* t, Var a);
Var log_softmax_rows(Tape* t, Var a);
Var transpose(Tape* t, Var a);
Var concat_cols(Tape* t, Var a, Var b);
Var slice_cols(Tape* t, Var a, int c0, int c1);
Var mean_rows(Tape* t, Var a);                  // 1 x cols
// rows of `table` at `ids`; backward scatter-adds
Var gather_rows(Tape* t, Var table, const std::vector<int>& ids);
Var layer_norm_rows(Tape* t, Var a, Var gain, Var bias, double eps = 1e-5);
// Sum over rows of -log softmax(logits)[row, target[row]]; returns 1x1.
Var nll_sum_rows(Tape* t, Var logits, const std::vector<int>& targets);

}  // namespace mtsum::nn
