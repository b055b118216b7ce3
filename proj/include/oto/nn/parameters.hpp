#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "oto/core/eigen.hpp"
#include "oto/core/error.hpp"

namespace oto::nn {

enum class InitKind { Uniform, Zeros, Ones };

/// A named parameter. The logical shape is stored as a row-major matrix of
/// shape[0] x prod(shape[1:]) (1 x n for vectors), so `value.data()` walks the
/// tensor in logical order.
template <class S>
struct ParameterTensor {
  std::string name;
  std::vector<int> shape;
  Mat<S> value;
  Mat<S> grad;
  InitKind init = InitKind::Uniform;
  int fan_in = 1;

  Eigen::Index numel() const { return value.size(); }
};

inline std::pair<Eigen::Index, Eigen::Index> matrix_dims(const std::vector<int>& shape) {
  if (shape.empty()) return {1, 1};
  if (shape.size() == 1) return {1, shape[0]};
  const Eigen::Index cols = std::accumulate(shape.begin() + 1, shape.end(), Eigen::Index{1},
                                            [](Eigen::Index a, int b) { return a * b; });
  return {shape[0], cols};
}

template <class S>
class ParameterStore {
 public:
  using Handle = std::size_t;

  Handle add(std::string name, std::vector<int> shape, InitKind init = InitKind::Uniform, int fan_in = 1) {
    if (index_.count(name)) throw ShapeError("duplicate parameter name '" + name + "'");
    for (int d : shape) {
      if (d <= 0) throw ShapeError("parameter '" + name + "' has a non-positive dimension");
    }
    const auto [rows, cols] = matrix_dims(shape);
    ParameterTensor<S> t;
    t.name = name;
    t.shape = std::move(shape);
    t.value = Mat<S>::Zero(rows, cols);
    t.grad = Mat<S>::Zero(rows, cols);
    t.init = init;
    t.fan_in = fan_in;
    index_.emplace(std::move(name), tensors_.size());
    tensors_.push_back(std::move(t));
    return tensors_.size() - 1;
  }

  std::size_t size() const { return tensors_.size(); }
  ParameterTensor<S>& operator[](Handle h) { return tensors_[h]; }
  const ParameterTensor<S>& operator[](Handle h) const { return tensors_[h]; }

  Handle handle(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ShapeError("no parameter named '" + name + "'");
    return it->second;
  }
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  const Mat<S>& value(Handle h) const { return tensors_[h].value; }
  Mat<S>& grad(Handle h) { return tensors_[h].grad; }

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  void zero_grad() {
    for (auto& t : tensors_) t.grad.setZero();
  }

  Eigen::Index num_scalars() const {
    Eigen::Index n = 0;
    for (const auto& t : tensors_) n += t.numel();
    return n;
  }

  /// Same names and shapes, values converted to T, gradients zeroed.
  template <class T>
  ParameterStore<T> cast() const {
    ParameterStore<T> out;
    for (const auto& t : tensors_) {
      auto h = out.add(t.name, t.shape, t.init, t.fan_in);
      out[h].value = t.value.template cast<T>();
    }
    return out;
  }

  /// Copies values from a store with identical layout.
  void assign_values(const ParameterStore& other) {
    if (other.size() != size()) throw ShapeError("parameter layout mismatch");
    for (std::size_t i = 0; i < size(); ++i) {
      if (tensors_[i].name != other.tensors_[i].name || tensors_[i].shape != other.tensors_[i].shape) {
        throw ShapeError("parameter layout mismatch at '" + tensors_[i].name + "'");
      }
      tensors_[i].value = other.tensors_[i].value;
    }
  }

 private:
  std::vector<ParameterTensor<S>> tensors_;
  std::unordered_map<std::string, Handle> index_;
};

}  // namespace oto::nn
