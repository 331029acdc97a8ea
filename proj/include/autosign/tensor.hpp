#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "autosign/errors.hpp"

namespace autosign {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

// All dense buffers are row-major contiguous doubles; Eigen maps give the
// math without a second storage layout.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

// Fixed-alignment storage: Eigen's vectorized kernels pick code paths by
// pointer alignment, so constant alignment keeps repeated evaluations
// bit-identical no matter how the heap is laid out.
using AlignedBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

Index shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense 64-bit tensor with an optional gradient buffer. A Tensor is a
/// value-semantic handle onto shared storage (copies alias the same data),
/// which lets tape nodes capture their operands cheaply. Accessors are const
/// in the handle sense: they never reseat the handle, but grad() and data()
/// expose the shared buffers for in-place accumulation.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> values,
                          bool requires_grad = false);
  static Tensor scalar_value(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  int rank() const;
  Index dim(int axis) const;
  Index numel() const;

  double* data() const;
  double scalar() const;  // value of a 1-element tensor

  bool requires_grad() const;
  void set_requires_grad(bool value) const;

  // Gradient buffer, zero-allocated on first touch.
  double* grad() const;
  const double* grad_data() const;  // nullptr if never touched
  void zero_grad() const;
  void ensure_grad() const;

  bool on_tape() const;

  // Rank-2 Eigen views over data/grad (rank-1 tensors view as a single row).
  MatMap mat() const;
  MatMap grad_mat() const;
  // Flat views.
  VecMap vec() const;
  VecMap grad_vec() const;

  // Identity of the underlying storage.
  const void* id() const { return impl_.get(); }

  friend class Tape;

 private:
  struct Impl {
    Shape shape;
    AlignedBuffer data;
    AlignedBuffer grad;  // empty until ensure_grad()
    bool requires_grad = false;
    bool on_tape = false;
  };
  Impl& impl() const;
  std::shared_ptr<Impl> impl_;
};

/// Wengert list: ops append themselves in execution order, which is a
/// topological order of the dataflow graph; backward() replays it in reverse.
class Tape {
 public:
  struct Node {
    Tensor output;
    std::function<void()> backprop;
  };

  /// Record a node. The output inherits requires_grad from the inputs; nodes
  /// whose inputs carry no gradient are skipped entirely, as is everything
  /// while recording is off.
  void record(const std::vector<Tensor>& inputs, const Tensor& output,
              std::function<void()> backprop);

  bool recording() const { return recording_; }
  void set_recording(bool value) { recording_ = value; }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  friend void backward(Tape& tape, const Tensor& loss);

 private:
  std::vector<Node> nodes_;
  bool recording_ = true;
};

/// Reverse-mode sweep from a scalar loss: seeds d(loss)/d(loss) = 1 and runs
/// every recorded backward rule in reverse order. Gradients accumulate
/// additively across fan-out. Throws ShapeError if loss is not a scalar and
/// DataError if loss was not produced on this tape.
void backward(Tape& tape, const Tensor& loss);

// Scoped recording switch for evaluation paths.
class NoGradGuard {
 public:
  explicit NoGradGuard(Tape& tape) : tape_(tape), prev_(tape.recording()) {
    tape_.set_recording(false);
  }
  ~NoGradGuard() { tape_.set_recording(prev_); }

 private:
  Tape& tape_;
  bool prev_;
};

}  // namespace autosign
