#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fedsim/error.hpp"
#include "fedsim/param_vector.hpp"

namespace fedsim {
namespace {

TEST(ParamVector, ArithmeticMatchesElementwise) {
  ParamVector a({1.0, 2.0, 3.0});
  ParamVector b({0.5, -1.0, 4.0});
  EXPECT_EQ(a + b, ParamVector({1.5, 1.0, 7.0}));
  EXPECT_EQ(a - b, ParamVector({0.5, 3.0, -1.0}));
  EXPECT_EQ(2.0 * a, ParamVector({2.0, 4.0, 6.0}));
  ParamVector c = a;
  c.axpy(-2.0, b);
  EXPECT_EQ(c, ParamVector({0.0, 4.0, -5.0}));
  EXPECT_DOUBLE_EQ(a.dot(b), 0.5 - 2.0 + 12.0);
  EXPECT_DOUBLE_EQ(ParamVector({3.0, 4.0}).norm(), 5.0);
  EXPECT_DOUBLE_EQ(distance(a, b), std::sqrt(0.25 + 9.0 + 1.0));
  EXPECT_DOUBLE_EQ(squared_distance(a, b), 0.25 + 9.0 + 1.0);
}

TEST(ParamVector, MismatchedShapesThrow) {
  ParamVector a({1.0, 2.0});
  ParamVector b({1.0, 2.0, 3.0});
  EXPECT_THROW(a += b, ShapeError);
  EXPECT_THROW((void)a.dot(b), ShapeError);
  EXPECT_THROW((void)distance(a, b), ShapeError);

  // Same length, different architecture.
  std::vector<std::size_t> l1{1, 1}, l2{2};
  ParamVector c({0.0, 0.0}, ShapeId::layered(l1));
  EXPECT_NE(c.shape(), a.shape());
  EXPECT_THROW(a += c, ShapeError);
  (void)l2;
}

TEST(ParamVector, MeanOfAndUniformity) {
  std::vector<ParamVector> vs{ParamVector({1.0, 3.0}), ParamVector({3.0, 5.0})};
  EXPECT_EQ(mean_of(vs), ParamVector({2.0, 4.0}));
  std::vector<ParamVector> empty;
  EXPECT_THROW(mean_of(empty), PreconditionError);
  vs.emplace_back(std::vector<double>{1.0});
  EXPECT_THROW(mean_of(vs), ShapeError);
}

TEST(ParamVector, FiniteCheck) {
  ParamVector a({1.0, std::numeric_limits<double>::quiet_NaN()});
  EXPECT_FALSE(a.all_finite());
  EXPECT_THROW(require_finite(a, "x"), NumericError);
  ParamVector b({1.0, std::numeric_limits<double>::infinity()});
  EXPECT_THROW(require_finite(b, "x"), NumericError);
  EXPECT_NO_THROW(require_finite(ParamVector({0.0}), "x"));
}

}  // namespace
}  // namespace fedsim
