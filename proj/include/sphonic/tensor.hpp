#ifndef SPHONIC_TENSOR_HPP
#define SPHONIC_TENSOR_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "sphonic/errors.hpp"

namespace sphonic {

using cplx = std::complex<double>;

/// Dense row-major matrix, just enough for basis matrices and PSD tables.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  const std::vector<T>& values() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

using ComplexMatrix = Matrix<cplx>;
using RealMatrix = Matrix<double>;

/// Dense complex cube indexed [slot][frame][bin]. The slot axis holds
/// microphone channels, SH coefficients, or group members depending on
/// context; frames and bins are always the STFT time and frequency axes.
class ComplexCube {
 public:
  ComplexCube() = default;
  ComplexCube(std::size_t slots, std::size_t frames, std::size_t bins, cplx fill = cplx{})
      : slots_(slots), frames_(frames), bins_(bins), data_(slots * frames * bins, fill) {}

  std::size_t slots() const { return slots_; }
  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  cplx& operator()(std::size_t s, std::size_t t, std::size_t b) {
    return data_[(s * frames_ + t) * bins_ + b];
  }
  const cplx& operator()(std::size_t s, std::size_t t, std::size_t b) const {
    return data_[(s * frames_ + t) * bins_ + b];
  }

  /// Pointer to the contiguous [frame][bin] plane of one slot.
  cplx* slot(std::size_t s) { return data_.data() + s * frames_ * bins_; }
  const cplx* slot(std::size_t s) const { return data_.data() + s * frames_ * bins_; }

  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  const std::vector<cplx>& values() const { return data_; }
  std::vector<cplx>& values() { return data_; }

  bool same_shape(const ComplexCube& o) const {
    return slots_ == o.slots_ && frames_ == o.frames_ && bins_ == o.bins_;
  }

  bool operator==(const ComplexCube&) const = default;

 private:
  std::size_t slots_ = 0, frames_ = 0, bins_ = 0;
  std::vector<cplx> data_;
};

/// Multichannel TF spectra: channels x frames x bins.
using TFSpectrum = ComplexCube;

inline void require_same_shape(const ComplexCube& a, const ComplexCube& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": tensor shapes differ");
}

}  // namespace sphonic

#endif
