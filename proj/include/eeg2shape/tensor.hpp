#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace e2s {

// Thrown when an operand's dimensions violate an operation's contract.
class shape_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown on non-finite values or diverging computations.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense n-dimensional array, row-major. All dims strictly positive.
template <typename T>
struct TensorT {
  std::vector<int> dims;
  std::vector<T> data;

  TensorT() = default;

  explicit TensorT(std::vector<int> shape, T fill = T(0))
      : dims(std::move(shape)), data(static_cast<std::size_t>(element_count(dims)), fill) {}

  TensorT(std::vector<int> shape, std::vector<T> values)
      : dims(std::move(shape)), data(std::move(values)) {
    if (static_cast<long long>(data.size()) != element_count(dims)) {
      throw shape_error("tensor data length " + std::to_string(data.size()) +
                        " does not match dims product " + std::to_string(element_count(dims)));
    }
  }

  static long long element_count(const std::vector<int>& shape) {
    if (shape.empty()) throw shape_error("tensor must have at least one dimension");
    long long n = 1;
    for (int d : shape) {
      if (d <= 0) throw shape_error("tensor dims must be positive, got " + std::to_string(d));
      n *= d;
    }
    return n;
  }

  int rank() const { return static_cast<int>(dims.size()); }
  long long size() const { return static_cast<long long>(data.size()); }

  T& operator[](long long i) { return data[static_cast<std::size_t>(i)]; }
  const T& operator[](long long i) const { return data[static_cast<std::size_t>(i)]; }

  // 2-d / 3-d / 4-d row-major accessors; callers guarantee rank.
  T& at2(int i, int j) { return data[static_cast<std::size_t>(i) * dims[1] + j]; }
  const T& at2(int i, int j) const { return data[static_cast<std::size_t>(i) * dims[1] + j]; }
  T& at3(int i, int j, int k) {
    return data[(static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k];
  }
  const T& at3(int i, int j, int k) const {
    return data[(static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k];
  }
  T& at4(int i, int j, int k, int l) {
    return data[((static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k) * dims[3] + l];
  }
  const T& at4(int i, int j, int k, int l) const {
    return data[((static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k) * dims[3] + l];
  }

  bool same_shape(const TensorT& other) const { return dims == other.dims; }

  bool all_finite() const {
    for (const T& v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  TensorT reshaped(std::vector<int> new_dims) const {
    if (element_count(new_dims) != size()) {
      throw shape_error("reshape target has different element count");
    }
    TensorT out;
    out.dims = std::move(new_dims);
    out.data = data;
    return out;
  }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

template <typename To, typename From>
TensorT<To> tensor_cast(const TensorT<From>& t) {
  TensorT<To> out(t.dims);
  for (long long i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
  return out;
}

template <typename T>
std::string dims_to_string(const std::vector<T>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

}  // namespace e2s
