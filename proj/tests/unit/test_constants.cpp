#include <fstream>

#include <gtest/gtest.h>

#include <perturbex/constants.hpp>
#include <perturbex/errors.hpp>

using namespace perturbex;

TEST(Constants, DefaultTableIsConsistent) {
  EXPECT_TRUE(constants_integrity_failures(default_constants()).empty());
  EXPECT_GE(constant_entries().size(), 25u);
}

TEST(Constants, Fractions) {
  EXPECT_EQ(parse_fraction("4/9"), 4.0 / 9.0);
  EXPECT_EQ(parse_fraction("3/2"), 1.5);
  EXPECT_EQ(parse_fraction("2"), 2.0);
  EXPECT_THROW(parse_fraction("a/b"), Error);
}

TEST(Constants, KnownValues) {
  const Constants& k = default_constants();
  EXPECT_EQ(k.concentration_nu, 0.75);
  EXPECT_EQ(k.t3_shift_tau_gate, 4.0 / 9.0);
  EXPECT_EQ(k.t3_value_tau_gate, 0.25);
  EXPECT_EQ(k.t4_tau4_gate, 1.0 / 3.0);
  EXPECT_EQ(k.second_order_omega_max, 1.0 / 3.0);
  EXPECT_EQ(k.t3_shift_radius_factor, 1.5);
  EXPECT_EQ(k.t3_value_radius_factor, 4.0 / 3.0);
  EXPECT_EQ(k.inflation, 1.5);
}

TEST(Constants, CorruptionDetected) {
  Constants k = default_constants();
  k.t3_shift_tau_gate = 0.5;
  const auto bad = constants_integrity_failures(k);
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_NE(bad[0].find("t3_shift_tau_gate"), std::string::npos);
}

TEST(Constants, JsonRoundTripAndStrictKeys) {
  const Constants k = constants_from_json(constants_to_json(default_constants()));
  EXPECT_TRUE(constants_integrity_failures(k).empty());
  EXPECT_THROW(constants_from_json(nlohmann::json{{"not_a_constant", 1.0}}), Error);
  const Constants partial = constants_from_json(nlohmann::json{{"t4_tau4_gate", 0.3}});
  EXPECT_EQ(partial.t4_tau4_gate, 0.3);
  EXPECT_EQ(constants_integrity_failures(partial).size(), 1u);
}

TEST(Constants, LoadFromFile) {
  EXPECT_THROW(load_constants("/nonexistent/constants.json"), Error);
  const std::string path = ::testing::TempDir() + "perturbex_constants.json";
  {
    std::ofstream out(path);
    out << "{\"concentration_nu\": 0.6}";
  }
  EXPECT_EQ(load_constants(path).concentration_nu, 0.6);
}
