#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "duoglass/errors.hpp"
#include "duoglass/text.hpp"

// Portable pixmap I/O. Reads P3 and P6 with maxval 255; always writes P6 with
// a fixed header layout so identical images produce identical bytes.

namespace duoglass {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // rgb triplets, row-major

  static Image filled(int w, int h, std::uint8_t r, std::uint8_t g,
                      std::uint8_t b) {
    Image img;
    img.width = w;
    img.height = h;
    img.data.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < img.data.size(); i += 3) {
      img.data[i] = r;
      img.data[i + 1] = g;
      img.data[i + 2] = b;
    }
    return img;
  }

  std::uint8_t& at(int x, int y, int channel) {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
  }
  std::uint8_t at(int x, int y, int channel) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
  }
  // Channel as a linear value in [0, 1].
  double level(int x, int y, int channel) const {
    return at(x, y, channel) / 255.0;
  }

  bool operator==(const Image&) const = default;
};

namespace detail {

// Pulls the next PPM header token, skipping whitespace and '#' comments.
inline std::string_view ppm_token(std::string_view body, std::size_t& pos) {
  while (pos < body.size()) {
    if (text::is_space(body[pos])) {
      ++pos;
    } else if (body[pos] == '#') {
      while (pos < body.size() && body[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < body.size() && !text::is_space(body[pos]) && body[pos] != '#')
    ++pos;
  return body.substr(start, pos - start);
}

inline long long ppm_int(std::string_view body, std::size_t& pos,
                         const char* what) {
  std::string_view tok = ppm_token(body, pos);
  long long value = 0;
  if (tok.empty() || !text::parse_int(tok, value))
    throw parse_error(std::string("malformed pixmap header: bad ") + what);
  return value;
}

}  // namespace detail

inline Image parse_image(std::string_view body) {
  std::size_t pos = 0;
  std::string_view magic = detail::ppm_token(body, pos);
  if (magic != "P3" && magic != "P6")
    throw unsupported_error("unsupported pixmap magic '" + std::string(magic) +
                            "' (expected P3 or P6)");
  long long w = detail::ppm_int(body, pos, "width");
  long long h = detail::ppm_int(body, pos, "height");
  long long maxval = detail::ppm_int(body, pos, "maxval");
  if (w < 1 || h < 1 || w * h > 100'000'000)
    throw parse_error("pixmap dimensions out of range");
  if (maxval != 255)
    throw unsupported_error("unsupported pixmap maxval " +
                            std::to_string(maxval) + " (only 255)");
  Image img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  std::size_t count = static_cast<std::size_t>(w) * h * 3;
  img.data.resize(count);
  if (magic == "P6") {
    if (pos >= body.size() || !text::is_space(body[pos]))
      throw parse_error("missing whitespace after maxval");
    ++pos;
    if (body.size() - pos < count)
      throw parse_error("truncated pixel payload: expected " +
                        std::to_string(count) + " bytes, got " +
                        std::to_string(body.size() - pos));
    for (std::size_t i = 0; i < count; ++i)
      img.data[i] = static_cast<std::uint8_t>(body[pos + i]);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      long long v = detail::ppm_int(body, pos, "pixel value");
      if (v < 0 || v > maxval)
        throw parse_error("pixel value " + std::to_string(v) +
                          " outside [0, 255]");
      img.data[i] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

// Exact bytes written for an image: magic, single spaces, no comments.
inline std::string write_image(const Image& img) {
  if (img.width < 1 || img.height < 1 ||
      img.data.size() != static_cast<std::size_t>(img.width) * img.height * 3)
    throw validation_error("image buffer does not match its dimensions");
  std::string out = "P6\n" + text::fmt(img.width) + " " +
                    text::fmt(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::string body((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw io_error("failed reading '" + path + "'");
  return body;
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("failed writing '" + path + "'");
}

inline Image read_image_file(const std::string& path) {
  return parse_image(read_file(path));
}

inline void write_image_file(const std::string& path, const Image& img) {
  write_file(path, write_image(img));
}

}  // namespace duoglass
