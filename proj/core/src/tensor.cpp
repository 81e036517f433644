// Copyright 2026 The radseg Authors. All Rights Reserved.
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

#include "radseg/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

RADSEG_NAMESPACE_BEGIN

Index numel(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

void require_shape(bool condition, const std::string& message) {
  if (!condition) throw ShapeError(message);
}

void TensorImpl::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), Real(0));
}

namespace {

thread_local bool g_grad_enabled = true;

void check_shape(const Shape& shape) {
  for (Index d : shape) {
    if (d <= 0) throw ShapeError("tensor extents must be positive, got " +
                                 to_string(shape));
  }
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor::Tensor(Shape shape, Real fill) : impl_(std::make_shared<TensorImpl>()) {
  check_shape(shape);
  impl_->data.assign(static_cast<std::size_t>(radseg::numel(shape)), fill);
  impl_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<Real> values)
    : impl_(std::make_shared<TensorImpl>()) {
  check_shape(shape);
  if (static_cast<Index>(values.size()) != radseg::numel(shape)) {
    throw ShapeError("tensor: " + std::to_string(values.size()) +
                     " values do not fill shape " + to_string(shape));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
}

Tensor Tensor::meta(Shape shape) {
  check_shape(shape);
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->meta = true;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(Real value) { return Tensor(Shape{1}, {value}); }

Index Tensor::dim(int axis) const {
  const int n = ndim();
  if (axis < 0) axis += n;
  if (axis < 0 || axis >= n) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     to_string(shape()));
  }
  return impl_->shape[static_cast<std::size_t>(axis)];
}

Real Tensor::item() const {
  if (!defined()) throw ShapeError("item() on an undefined tensor");
  if (numel() != 1 || is_meta()) {
    throw ShapeError("item() requires a single-element tensor, got " +
                     to_string(shape()));
  }
  return impl_->data[0];
}

Tensor& Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  if (on && !impl_->meta) {
    impl_->ensure_grad();
  } else {
    impl_->grad.clear();
  }
  return *this;
}

void Tensor::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), Real(0));
}

void Tensor::backward() const {
  if (numel() != 1) {
    throw ShapeError("backward() requires a scalar, got " + to_string(shape()));
  }
  if (!impl_->requires_grad) {
    throw ConfigError("backward() on a tensor that does not require grad");
  }

  // Iterative post-order DFS gives a topological order of the graph.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, std::size_t>> stack;
  stack.emplace_back(impl_.get(), 0);
  visited.insert(impl_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorImpl* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  impl_->ensure_grad();
  impl_->grad[0] += Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* node = *it;
    if (node->backward) {
      for (auto& p : node->parents) {
        if (p->requires_grad) p->ensure_grad();
      }
      node->backward(*node);
    }
  }
  // Release the graph; parameters keep their accumulated gradients.
  for (TensorImpl* node : order) {
    if (node->backward) {
      node->backward = nullptr;
      node->parents.clear();
    }
  }
}

Tensor Tensor::detach() const {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  impl->meta = impl_->meta;
  return Tensor(std::move(impl));
}

Tensor Tensor::clone() const {
  Tensor t = detach();
  if (impl_->requires_grad) {
    t.set_requires_grad(true);
    t.impl_->grad = impl_->grad;
  }
  return t;
}

bool needs_grad(std::initializer_list<const Tensor*> inputs) {
  if (!g_grad_enabled) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) {
    return t && t->defined() && t->requires_grad();
  });
}

bool any_meta(std::initializer_list<const Tensor*> inputs) {
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) {
    return t && t->defined() && t->is_meta();
  });
}

Tensor make_result(Shape shape, std::vector<Real> values,
                   std::initializer_list<const Tensor*> inputs,
                   BackwardFn backward) {
  Tensor out(std::move(shape), std::move(values));
  if (backward && needs_grad(inputs)) {
    auto& impl = *out.impl();
    for (const Tensor* t : inputs) {
      if (t && t->defined()) impl.parents.push_back(t->impl());
    }
    impl.backward = std::move(backward);
    out.set_requires_grad(true);
  }
  return out;
}

RADSEG_NAMESPACE_END
