#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wmlab {

template <typename T>
using MatrixRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense NCHW tensor. Scalars are (1,1,1,1); single images (1,C,H,W).
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, T fill = T(0))
      : n_(n), c_(c), h_(h), w_(w), data_(static_cast<size_t>(n) * c * h * w, fill) {
    if (n <= 0 || c <= 0 || h <= 0 || w <= 0) throw std::invalid_argument("Tensor: non-positive dim");
  }

  static Tensor scalar(T v) {
    Tensor t(1, 1, 1, 1);
    t.data_[0] = v;
    return t;
  }

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool same_shape(const Tensor& o) const {
    return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }
  std::string shape_str() const {
    return "(" + std::to_string(n_) + "," + std::to_string(c_) + "," + std::to_string(h_) + "," +
           std::to_string(w_) + ")";
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  T& at(int n, int c, int h, int w) { return data_[idx(n, c, h, w)]; }
  const T& at(int n, int c, int h, int w) const { return data_[idx(n, c, h, w)]; }

  size_t idx(int n, int c, int h, int w) const {
    return ((static_cast<size_t>(n) * c_ + c) * h_ + h) * w_ + w;
  }

  T* plane(int n, int c) { return data_.data() + idx(n, c, 0, 0); }
  const T* plane(int n, int c) const { return data_.data() + idx(n, c, 0, 0); }

  void zero() { std::fill(data_.begin(), data_.end(), T(0)); }
  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  // (H,W) view of one channel plane
  Eigen::Map<MatrixRM<T>> plane_mat(int n, int c) {
    return Eigen::Map<MatrixRM<T>>(plane(n, c), h_, w_);
  }
  Eigen::Map<const MatrixRM<T>> plane_mat(int n, int c) const {
    return Eigen::Map<const MatrixRM<T>>(plane(n, c), h_, w_);
  }

  T item() const {
    if (size() != 1) throw std::logic_error("Tensor::item on non-scalar " + shape_str());
    return data_[0];
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(n_, c_, h_, w_);
    for (size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

 private:
  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<T> data_;
};

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

}  // namespace wmlab
