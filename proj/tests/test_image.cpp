#include "catch_amalgamated.hpp"
#include "duoglass/duoglass.hpp"
#include "oracles.hpp"

using namespace duoglass;

TEST_CASE("write_image emits the exact canonical P6 header") {
  Image img = Image::filled(2, 1, 255, 0, 128);
  std::string bytes = write_image(img);
  std::string expected = std::string("P6\n2 1\n255\n") +
                         std::string("\xff\x00\x80\xff\x00\x80", 6);
  CHECK(bytes == expected);
}

TEST_CASE("P3 and P6 encodings parse to the same image") {
  oracles::Rng rng(0xb1b);
  for (int trial = 0; trial < 50; ++trial) {
    Image img = oracles::random_image(rng, rng.integer(1, 12),
                                      rng.integer(1, 12));
    Image from_p6 = parse_image(write_image(img));
    Image from_p3 = parse_image(oracles::to_p3(img));
    CHECK(from_p6 == img);
    CHECK(from_p3 == img);
  }
}

TEST_CASE("read of write is the identity") {
  oracles::Rng rng(0x1de);
  for (int trial = 0; trial < 100; ++trial) {
    Image img = oracles::random_image(rng, rng.integer(1, 16),
                                      rng.integer(1, 16));
    CHECK(parse_image(write_image(img)) == img);
  }
}

TEST_CASE("1x1 white P6 decodes to a single full pixel") {
  std::string bytes = std::string("P6\n1 1\n255\n") +
                      std::string("\xff\xff\xff", 3);
  Image img = parse_image(bytes);
  CHECK(img.width == 1);
  CHECK(img.height == 1);
  CHECK(img.level(0, 0, 0) == 1.0);
  CHECK(img.level(0, 0, 2) == 1.0);
}

TEST_CASE("comments and whitespace in headers are tolerated") {
  Image img = parse_image("P3 # magic\n# a comment line\n 2 1 # dims\n255\n"
                          "1 2 3  4 5 6\n");
  CHECK(img.width == 2);
  CHECK(img.at(0, 0, 0) == 1);
  CHECK(img.at(1, 0, 2) == 6);
}

TEST_CASE("unsupported and malformed pixmaps are rejected") {
  SECTION("maxval other than 255") {
    CHECK_THROWS_WITH(
        parse_image("P3\n1 1\n65535\n0 0 0\n"),
        Catch::Matchers::ContainsSubstring("65535"));
    CHECK_THROWS_AS(parse_image("P3\n1 1\n65535\n0 0 0\n"),
                    unsupported_error);
  }
  SECTION("truncated P6 payload") {
    std::string bytes = std::string("P6\n2 2\n255\n") + std::string(5, '\0');
    CHECK_THROWS_WITH(parse_image(bytes),
                      Catch::Matchers::ContainsSubstring("12"));
  }
  SECTION("wrong magic") {
    CHECK_THROWS_AS(parse_image("P5\n1 1\n255\n\0"), unsupported_error);
  }
  SECTION("P3 sample out of range") {
    CHECK_THROWS_AS(parse_image("P3\n1 1\n255\n0 0 300\n"), parse_error);
  }
  SECTION("P3 with too few samples") {
    CHECK_THROWS_AS(parse_image("P3\n2 1\n255\n0 0 0\n"), parse_error);
  }
  SECTION("non-positive dimensions") {
    CHECK_THROWS_AS(parse_image("P3\n0 1\n255\n"), parse_error);
  }
}

TEST_CASE("file io round-trips through disk") {
  oracles::Rng rng(0xd15c);
  Image img = oracles::random_image(rng, 5, 7);
  std::string path = "test_image_roundtrip.ppm";
  write_image_file(path, img);
  CHECK(read_image_file(path) == img);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_image_file("definitely_missing_file.ppm"), io_error);
}
