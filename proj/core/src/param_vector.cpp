#include "fedsim/param_vector.hpp"

#include <cmath>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

ShapeId ShapeId::flat(std::size_t dim) {
  return ShapeId(splitmix64(0x666c6174ULL ^ splitmix64(dim)));
}

ShapeId ShapeId::layered(std::span<const std::size_t> layer_sizes) {
  std::uint64_t h = splitmix64(0x6d6c70ULL);
  for (std::size_t s : layer_sizes) h = splitmix64(h ^ s);
  return ShapeId(h);
}

ParamVector::ParamVector(std::vector<double> values)
    : values_(std::move(values)), shape_(ShapeId::flat(values_.size())) {}

ParamVector ParamVector::zeros(std::size_t dim, ShapeId shape) {
  return ParamVector(std::vector<double>(dim, 0.0), shape);
}

void require_same_shape(const ParamVector& a, const ParamVector& b) {
  if (a.shape() != b.shape() || a.size() != b.size()) {
    throw ShapeError("parameter vectors of different shapes (" +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
}

void require_uniform(std::span<const ParamVector> vs, const char* what) {
  if (vs.empty()) throw PreconditionError(std::string(what) + ": empty update list");
  for (const auto& v : vs.subspan(1)) require_same_shape(vs.front(), v);
}

const ParamVector& require_finite(const ParamVector& v, const char* what) {
  if (!v.all_finite()) throw NumericError(std::string(what) + ": non-finite entry");
  return v;
}

ParamVector& ParamVector::operator+=(const ParamVector& rhs) {
  require_same_shape(*this, rhs);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values_[i];
  return *this;
}

ParamVector& ParamVector::operator-=(const ParamVector& rhs) {
  require_same_shape(*this, rhs);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= rhs.values_[i];
  return *this;
}

ParamVector& ParamVector::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ParamVector& ParamVector::axpy(double s, const ParamVector& x) {
  require_same_shape(*this, x);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * x.values_[i];
  return *this;
}

double ParamVector::dot(const ParamVector& rhs) const {
  require_same_shape(*this, rhs);
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) acc += values_[i] * rhs.values_[i];
  return acc;
}

double ParamVector::norm() const {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return std::sqrt(acc);
}

bool ParamVector::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ParamVector operator+(ParamVector lhs, const ParamVector& rhs) { return lhs += rhs; }
ParamVector operator-(ParamVector lhs, const ParamVector& rhs) { return lhs -= rhs; }
ParamVector operator*(double s, ParamVector v) { return v *= s; }

double squared_distance(const ParamVector& a, const ParamVector& b) {
  require_same_shape(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double distance(const ParamVector& a, const ParamVector& b) {
  return std::sqrt(squared_distance(a, b));
}

ParamVector mean_of(std::span<const ParamVector> vs) {
  require_uniform(vs, "mean");
  ParamVector out = ParamVector::zeros_like(vs.front());
  for (const auto& v : vs) out += v;
  out *= 1.0 / static_cast<double>(vs.size());
  return out;
}

}  // namespace fedsim
