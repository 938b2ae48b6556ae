#include "catch_amalgamated.hpp"
#include "duoglass/duoglass.hpp"
#include "oracles.hpp"

using namespace duoglass;

TEST_CASE("fmt emits the shortest round-trip form") {
  CHECK(text::fmt(16.0) == "16");
  CHECK(text::fmt(0.25) == "0.25");
  CHECK(text::fmt(-3.5) == "-3.5");
  CHECK(text::fmt(0.0) == "0");
  CHECK(text::fmt(42) == "42");
  CHECK(text::fmt(std::size_t{7}) == "7");
}

TEST_CASE("fmt and parse_double are a bitwise identity") {
  oracles::Rng rng(0xf00d);
  for (int i = 0; i < 1000; ++i) {
    double scale = std::pow(10.0, rng.uniform(-12.0, 12.0));
    double x = (rng.unit() - 0.5) * scale;
    double back = 0;
    REQUIRE(text::parse_double(text::fmt(x), back));
    // Bitwise equality, not approximate.
    CHECK(std::memcmp(&x, &back, sizeof x) == 0);
  }
}

TEST_CASE("parse_double consumes whole tokens only") {
  double v = 0;
  CHECK(text::parse_double("1.5", v));
  CHECK(v == 1.5);
  CHECK_FALSE(text::parse_double("1.5x", v));
  CHECK_FALSE(text::parse_double("", v));
  CHECK_FALSE(text::parse_double("one", v));
  CHECK(text::parse_double("inf", v));
  CHECK(std::isinf(v));
}

TEST_CASE("parse_int consumes whole tokens only") {
  long long v = 0;
  CHECK(text::parse_int("42", v));
  CHECK(v == 42);
  CHECK_FALSE(text::parse_int("42.5", v));
  CHECK_FALSE(text::parse_int("", v));
}

TEST_CASE("tokenize reports 1-based columns") {
  auto tokens = text::tokenize("ab  cd e");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0].value == "ab");
  CHECK(tokens[0].column == 1);
  CHECK(tokens[1].value == "cd");
  CHECK(tokens[1].column == 5);
  CHECK(tokens[2].value == "e");
  CHECK(tokens[2].column == 8);
  CHECK(text::tokenize("   ").empty());
}

TEST_CASE("trim strips ascii whitespace") {
  CHECK(text::trim("  a b \t") == "a b");
  CHECK(text::trim("") == "");
  CHECK(text::trim(" \t ") == "");
}

TEST_CASE("iequals is ascii case-insensitive") {
  CHECK(text::iequals("HCM-009", "hcm-009"));
  CHECK_FALSE(text::iequals("a", "ab"));
}
