#include "autosign/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace autosign {

Index shape_numel(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

static void check_shape(const Shape& shape) {
  for (Index d : shape) {
    if (d < 0) throw ShapeError("negative extent in shape " + shape_str(shape));
  }
}

Tensor::Impl& Tensor::impl() const {
  if (!impl_) throw DataError("use of undefined tensor");
  return *impl_;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  check_shape(shape);
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = std::move(shape);
  t.impl_->data.assign(static_cast<std::size_t>(shape_numel(t.impl_->shape)), 0.0);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
  return t;
}

Tensor Tensor::from_data(Shape shape, std::vector<double> values, bool requires_grad) {
  check_shape(shape);
  if (shape_numel(shape) != static_cast<Index>(values.size()))
    throw ShapeError("data length " + std::to_string(values.size()) +
                     " does not match shape " + shape_str(shape));
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = std::move(shape);
  t.impl_->data.assign(values.begin(), values.end());
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::scalar_value(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return impl().shape; }

int Tensor::rank() const { return static_cast<int>(shape().size()); }

Index Tensor::dim(int axis) const {
  const Shape& s = shape();
  if (axis < 0 || axis >= static_cast<int>(s.size()))
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  return s[static_cast<std::size_t>(axis)];
}

Index Tensor::numel() const { return shape_numel(shape()); }

double* Tensor::data() const { return impl().data.data(); }

double Tensor::scalar() const {
  if (numel() != 1) throw ShapeError("scalar() on tensor of shape " + shape_str(shape()));
  return impl().data[0];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

void Tensor::set_requires_grad(bool value) const { impl().requires_grad = value; }

void Tensor::ensure_grad() const {
  Impl& i = impl();
  if (i.grad.empty()) i.grad.assign(i.data.size(), 0.0);
}

double* Tensor::grad() const {
  ensure_grad();
  return impl().grad.data();
}

const double* Tensor::grad_data() const {
  return impl().grad.empty() ? nullptr : impl().grad.data();
}

void Tensor::zero_grad() const {
  Impl& i = impl();
  if (!i.grad.empty()) std::fill(i.grad.begin(), i.grad.end(), 0.0);
}

bool Tensor::on_tape() const { return impl_ && impl_->on_tape; }

static std::pair<Index, Index> as_2d(const Shape& s) {
  if (s.size() == 2) return {s[0], s[1]};
  if (s.size() == 1) return {1, s[0]};
  throw ShapeError("rank-2 view of tensor with shape " + shape_str(s));
}

MatMap Tensor::mat() const {
  auto [r, c] = as_2d(shape());
  return MatMap(data(), r, c);
}

MatMap Tensor::grad_mat() const {
  auto [r, c] = as_2d(shape());
  return MatMap(grad(), r, c);
}

VecMap Tensor::vec() const { return VecMap(data(), numel()); }
VecMap Tensor::grad_vec() const { return VecMap(grad(), numel()); }

void Tape::record(const std::vector<Tensor>& inputs, const Tensor& output,
                  std::function<void()> backprop) {
  bool needs_grad = false;
  for (const Tensor& in : inputs) needs_grad = needs_grad || in.requires_grad();
  output.set_requires_grad(needs_grad);
  if (!recording_ || !needs_grad) return;
  output.impl_->on_tape = true;
  nodes_.push_back(Node{output, std::move(backprop)});
}

void backward(Tape& tape, const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1)
    throw ShapeError("backward() requires a scalar loss");
  if (!loss.on_tape())
    throw DataError("backward() on a tensor that was not produced on the tape");
  loss.grad()[0] = 1.0;
  for (auto it = tape.nodes_.rbegin(); it != tape.nodes_.rend(); ++it) {
    if (it->output.grad_data() == nullptr) continue;  // no contribution to loss
    it->backprop();
  }
}

}  // namespace autosign
