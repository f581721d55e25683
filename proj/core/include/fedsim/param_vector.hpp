#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fedsim {

/// Identifies the architecture a parameter vector belongs to. Vectors can be
/// combined only when their shape ids are equal.
class ShapeId {
 public:
  constexpr ShapeId() = default;
  constexpr explicit ShapeId(std::uint64_t value) : value_(value) {}

  /// Shape of an unstructured vector of length `dim`.
  static ShapeId flat(std::size_t dim);
  /// Shape of an MLP with the given layer sizes.
  static ShapeId layered(std::span<const std::size_t> layer_sizes);

  constexpr std::uint64_t value() const noexcept { return value_; }
  friend constexpr bool operator==(ShapeId, ShapeId) = default;

 private:
  std::uint64_t value_ = 0;
};

/// Dense model parameters or a model update.
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(std::vector<double> values, ShapeId shape)
      : values_(std::move(values)), shape_(shape) {}
  /// Unstructured vector; shape id derived from the length.
  explicit ParamVector(std::vector<double> values);

  static ParamVector zeros(std::size_t dim, ShapeId shape);
  static ParamVector zeros_like(const ParamVector& other) {
    return zeros(other.size(), other.shape());
  }

  std::size_t size() const noexcept { return values_.size(); }
  ShapeId shape() const noexcept { return shape_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  ParamVector& operator+=(const ParamVector& rhs);
  ParamVector& operator-=(const ParamVector& rhs);
  ParamVector& operator*=(double s);
  /// this += s * x
  ParamVector& axpy(double s, const ParamVector& x);

  double dot(const ParamVector& rhs) const;
  double norm() const;
  bool all_finite() const noexcept;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
  ShapeId shape_;
};

ParamVector operator+(ParamVector lhs, const ParamVector& rhs);
ParamVector operator-(ParamVector lhs, const ParamVector& rhs);
ParamVector operator*(double s, ParamVector v);

double distance(const ParamVector& a, const ParamVector& b);
double squared_distance(const ParamVector& a, const ParamVector& b);

/// Throws ShapeError unless `a` and `b` are combinable.
void require_same_shape(const ParamVector& a, const ParamVector& b);
/// Throws ShapeError unless the list is nonempty and uniformly shaped.
void require_uniform(std::span<const ParamVector> vs, const char* what);
/// Throws NumericError if any entry is NaN or infinite.
const ParamVector& require_finite(const ParamVector& v, const char* what);

/// Unweighted coordinate-wise mean.
ParamVector mean_of(std::span<const ParamVector> vs);

}  // namespace fedsim
