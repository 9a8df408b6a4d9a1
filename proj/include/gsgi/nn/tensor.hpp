#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gsgi/errors.hpp"

namespace gsgi::nn {

// Hands out 64-byte aligned blocks.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

// Dense row-major array of doubles.
class Tensor {
 public:
  using Storage = std::vector<double, AlignedAllocator<double>>;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(count(shape_), fill) {}
  Tensor(std::vector<int> shape, const std::vector<double>& data)
      : Tensor(std::move(shape), Storage(data.begin(), data.end())) {}
  Tensor(std::vector<int> shape, Storage data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) {
      throw KernelError("tensor data size does not match shape " +
                        shape_string());
    }
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  Storage& storage() { return data_; }
  const Storage& storage() const { return data_; }
  std::vector<double> to_vector() const { return {data_.begin(), data_.end()}; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Rank-3 (channel, row, col) access.
  double& at(int c, int h, int w) {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + h) * shape_[2] + w];
  }
  double at(int c, int h, int w) const {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + h) * shape_[2] + w];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(0.0); }

  Tensor reshaped(std::vector<int> shape) const {
    return Tensor(std::move(shape), data_);
  }

  std::string shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

  static std::size_t count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw KernelError("tensor dimensions must be positive");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

 private:
  std::vector<int> shape_;
  Storage data_;
};

inline void require_shape(const Tensor& t, const std::vector<int>& shape,
                          const char* what) {
  if (t.shape() != shape) {
    Tensor expect(shape);
    throw KernelError(std::string(what) + ": expected shape " +
                      expect.shape_string() + ", got " + t.shape_string());
  }
}

}  // namespace gsgi::nn
