// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_PARAMS_HPP
#define IMORE_PARAMS_HPP

#include <map>
#include <string>
#include <vector>

#include "imore/autograd.hpp"
#include "imore/tensor.hpp"

namespace imore {

enum class Init { Zero, One, XavierUniform, Normal02 };

template <class T>
struct Param {
  std::string name;
  Mat<T> value;
  bool decay = false;  // weight-decay eligibility; biases/gains stay exempt
  // AdamW state
  Mat<T> m, v;
};

template <class T>
class ParamRegistry {
 public:
  int add(const std::string& name, int rows, int cols, Init init, bool decay, Rng& rng) {
    if (index_.count(name)) throw ConfigError("duplicate parameter: " + name);
    Param<T> p;
    p.name = name;
    p.decay = decay;
    switch (init) {
      case Init::Zero: p.value = Mat<T>::Zero(rows, cols); break;
      case Init::One: p.value = Mat<T>::Ones(rows, cols); break;
      case Init::XavierUniform: p.value = xavier_uniform<T>(rows, cols, rng); break;
      case Init::Normal02: p.value = random_normal<T>(rows, cols, 0.02, rng); break;
    }
    index_[name] = static_cast<int>(params_.size());
    params_.push_back(std::move(p));
    return static_cast<int>(params_.size() - 1);
  }

  int index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
    return it->second;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Param<T>& at(int i) { return params_.at(i); }
  const Param<T>& at(int i) const { return params_.at(i); }
  Param<T>& at(const std::string& name) { return params_.at(index_of(name)); }
  const Param<T>& at(const std::string& name) const { return params_.at(index_of(name)); }

  int size() const { return static_cast<int>(params_.size()); }

  long long scalar_count() const {
    long long n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

 private:
  std::vector<Param<T>> params_;
  std::map<std::string, int> index_;
};

/// Per-forward binding of parameters onto a tape; binding the same name twice
/// returns the same node so gradients accumulate.
template <class T>
struct ForwardCtx {
  Tape<T>& tape;
  const ParamRegistry<T>& params;
  Rng* dropout_rng = nullptr;  // null = eval mode
  T dropout_rate = 0;

  Var<T> p(const std::string& name) {
    const int idx = params.index_of(name);
    auto it = bound.find(idx);
    if (it != bound.end()) return it->second;
    Var<T> v = tape.external(&params.at(idx).value);
    bound.emplace(idx, v);
    return v;
  }

  Var<T> drop(Var<T> x) { return dropout(x, dropout_rate, dropout_rng); }

  std::map<int, Var<T>> bound;  // param index -> leaf
};

/// Accumulates parameter gradients across per-example tapes.
template <class T>
class GradBuffer {
 public:
  explicit GradBuffer(const ParamRegistry<T>& registry) {
    grads_.reserve(registry.size());
    for (int i = 0; i < registry.size(); ++i) {
      grads_.push_back(Mat<T>::Zero(registry.at(i).value.rows(), registry.at(i).value.cols()));
    }
  }

  void accumulate(Tape<T>& tape, const ForwardCtx<T>& ctx) {
    for (const auto& [idx, var] : ctx.bound) {
      if (tape.grad_touched(var)) grads_[idx] += tape.grad(var);
    }
    ++count_;
  }

  void add_raw(int idx, const Mat<T>& g) { grads_.at(idx) += g; }

  /// Mean over accumulated examples.
  std::vector<Mat<T>> mean() const {
    std::vector<Mat<T>> out = grads_;
    const T inv = count_ > 0 ? static_cast<T>(1) / static_cast<T>(count_) : static_cast<T>(0);
    for (auto& g : out) g *= inv;
    return out;
  }

  const std::vector<Mat<T>>& raw() const { return grads_; }
  int count() const { return count_; }

  void reset() {
    for (auto& g : grads_) g.setZero();
    count_ = 0;
  }

 private:
  std::vector<Mat<T>> grads_;
  int count_ = 0;
};

struct AdamWConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;  // decoupled, decay-eligible tensors only
};

/// One decoupled-weight-decay Adam step over the whole registry.
template <class T>
class AdamW {
 public:
  explicit AdamW(AdamWConfig config) : config_(config) {}

  void step(ParamRegistry<T>& registry, const std::vector<Mat<T>>& grads) {
    if (static_cast<int>(grads.size()) != registry.size()) {
      throw ShapeError("adamw: gradient count mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, t_);
    const double bc2 = 1.0 - std::pow(config_.beta2, t_);
    for (int i = 0; i < registry.size(); ++i) {
      Param<T>& p = registry.at(i);
      const Mat<T>& g = grads[i];
      if (!same_shape(p.value, g)) throw ShapeError("adamw: shape mismatch for " + p.name);
      if (p.m.size() == 0) {
        p.m = Mat<T>::Zero(g.rows(), g.cols());
        p.v = Mat<T>::Zero(g.rows(), g.cols());
      }
      p.m = static_cast<T>(config_.beta1) * p.m + static_cast<T>(1.0 - config_.beta1) * g;
      p.v = (static_cast<T>(config_.beta2) * p.v.array() +
             static_cast<T>(1.0 - config_.beta2) * g.array().square())
                .matrix();
      const Mat<T> mhat = p.m / static_cast<T>(bc1);
      const Mat<T> vhat = p.v / static_cast<T>(bc2);
      Mat<T> update =
          (mhat.array() / (vhat.array().sqrt() + static_cast<T>(config_.eps))).matrix();
      if (p.decay && config_.weight_decay != 0.0) {
        update += static_cast<T>(config_.weight_decay) * p.value;
      }
      p.value -= static_cast<T>(config_.lr) * update;
    }
  }

  int64_t steps() const { return t_; }

 private:
  AdamWConfig config_;
  int64_t t_ = 0;
};

}  // namespace imore

#endif
