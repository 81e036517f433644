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

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "radseg/config.hpp"

RADSEG_NAMESPACE_BEGIN

using Shape = std::vector<Index>;

Index numel(const Shape& shape);
std::string to_string(const Shape& shape);

struct TensorImpl;

// Called once per node during backward with the node itself; implementations
// read `out.grad` and accumulate into their captured parents.
using BackwardFn = std::function<void(const TensorImpl& out)>;

struct TensorImpl {
  Shape shape;
  std::vector<Real> data;
  std::vector<Real> grad;
  bool requires_grad = false;
  // Meta tensors carry a shape but no storage; ops propagate them without
  // arithmetic (shape tracing).
  bool meta = false;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  BackwardFn backward;

  void ensure_grad();
};

// Dense row-major tensor handle. Copies share storage (like a reference);
// use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0));
  Tensor(Shape shape, std::vector<Real> values);

  static Tensor meta(Shape shape);
  static Tensor scalar(Real value);

  bool defined() const { return impl_ != nullptr; }
  bool is_meta() const { return impl_->meta; }

  const Shape& shape() const { return impl_->shape; }
  int ndim() const { return static_cast<int>(impl_->shape.size()); }
  // Negative axes count from the end.
  Index dim(int axis) const;
  Index numel() const { return radseg::numel(impl_->shape); }

  std::span<Real> values() { return impl_->data; }
  std::span<const Real> values() const { return impl_->data; }
  Real* data() { return impl_->data.data(); }
  const Real* data() const { return impl_->data.data(); }
  Real item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on);
  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<Real> grad() { return impl_->grad; }
  std::span<const Real> grad() const { return impl_->grad; }
  void zero_grad();

  // Reverse-mode sweep from a scalar. Intermediate closures are released
  // afterwards; leaf gradients accumulate.
  void backward() const;

  Tensor detach() const;
  Tensor clone() const;

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Gradient recording switch (thread-local). Forward passes under a
// NoGradGuard build no graph.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// True if a graph node must be recorded for an op over `inputs`.
bool needs_grad(std::initializer_list<const Tensor*> inputs);
bool any_meta(std::initializer_list<const Tensor*> inputs);

// Wraps freshly computed values into a result tensor and, when required,
// attaches the backward closure and parent links.
Tensor make_result(Shape shape, std::vector<Real> values,
                   std::initializer_list<const Tensor*> inputs,
                   BackwardFn backward);

void require(bool condition, const std::string& message);
void require_shape(bool condition, const std::string& message);

RADSEG_NAMESPACE_END
