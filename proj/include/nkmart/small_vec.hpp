#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace nkmart {

inline constexpr std::size_t kMaxDim = 4;

// Fixed-capacity vector so model callbacks never allocate in the stepping loop.
class StateVec {
 public:
  StateVec() = default;
  explicit StateVec(std::size_t n, double fill = 0.0) : size_(n) {
    if (n > kMaxDim) size_ = kMaxDim + 1;  // flagged by validation
    for (std::size_t i = 0; i < kMaxDim; ++i) data_[i] = fill;
  }
  StateVec(std::initializer_list<double> values) {
    for (double v : values) {
      if (size_ < kMaxDim) data_[size_] = v;
      ++size_;
    }
  }

  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] bool valid() const { return size_ <= kMaxDim; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  [[nodiscard]] std::span<const double> span() const { return {data_.data(), valid() ? size_ : 0}; }
  [[nodiscard]] const double* begin() const { return data_.data(); }
  [[nodiscard]] const double* end() const { return data_.data() + (valid() ? size_ : 0); }

 private:
  std::array<double, kMaxDim> data_{};
  std::size_t size_ = 0;
};

// Row-major rows x cols matrix with the same capacity bound per dimension.
class StateMat {
 public:
  StateMat() = default;
  StateMat(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols) {
    data_.fill(fill);
  }
  StateMat(std::size_t rows, std::size_t cols, std::initializer_list<double> values)
      : rows_(rows), cols_(cols) {
    std::size_t i = 0;
    for (double v : values) {
      if (i < data_.size()) data_[i] = v;
      ++i;
    }
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] bool valid() const { return rows_ <= kMaxDim && cols_ <= kMaxDim; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * kMaxDim + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * kMaxDim + c]; }

 private:
  std::array<double, kMaxDim * kMaxDim> data_{};
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

}  // namespace nkmart
