#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include <perturbex/errors.hpp>
#include <perturbex/expand.hpp>
#include <perturbex/serialize.hpp>

using namespace perturbex;

TEST(Serialize, NonFiniteMapsToNull) {
  EXPECT_TRUE(number_to_json(std::numeric_limits<double>::infinity()).is_null());
  EXPECT_TRUE(number_to_json(std::nan("")).is_null());
  EXPECT_EQ(number_to_json(1.5).get<double>(), 1.5);
}

TEST(Serialize, VectorMatrixRoundTrip) {
  const Vector v = (Vector(3) << 1.0, -2.5, 1e-300).finished();
  EXPECT_EQ(vector_from_json(to_json(v)), v);
  const Matrix m{{1, 2}, {3, 4}, {5, 6}};
  EXPECT_EQ(matrix_from_json(to_json(m)), m);
  EXPECT_THROW(matrix_from_json(nlohmann::json::parse("[[1, 2], [3]]")), Error);
  EXPECT_THROW(vector_from_json(nlohmann::json::parse("[1, \"x\"]")), Error);
}

TEST(Serialize, DumpIsDeterministic) {
  const SpdOperator F = SpdOperator::from_dense(Matrix{{2, 0.3}, {0.3, 1}});
  const Vector a = (Vector(2) << 0.1, -0.2).finished();
  const std::string first = dump_report(to_json(exact_quadratic_expansion(F, a)));
  const std::string second = dump_report(to_json(exact_quadratic_expansion(F, a)));
  EXPECT_EQ(first, second);
  EXPECT_EQ(first.back(), '\n');
  const nlohmann::json back = nlohmann::json::parse(first);
  EXPECT_EQ(dump_report(back), first);
}

TEST(Serialize, ReportCarriesBoundsAndCertificate) {
  const SpdOperator F = SpdOperator::identity(2);
  const SmoothnessCertificate c = declared_certificate(F, 1.0, 1.0, 0.0, 0.1, 0.1);
  const Vector a = Vector::Constant(2, 0.01);
  const nlohmann::json j = to_json(third_order_expansion(F, Vector::Zero(2), a, c));
  EXPECT_TRUE(j.contains("bounds"));
  EXPECT_TRUE(j.at("certificate").is_object());
  EXPECT_FALSE(j.at("bounds").at("gates").empty());
}
