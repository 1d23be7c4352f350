#include "camsic/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace camsic {

PaddedImage pad_image(const ImagePlane& x, int factor) {
  if (factor < 1) fail(ErrorCode::kParameter, "padding factor must be >= 1");
  if (x.height <= 0 || x.width <= 0) fail(ErrorCode::kDimension, "empty image");
  const int h = (x.height + factor - 1) / factor * factor;
  const int w = (x.width + factor - 1) / factor * factor;
  PaddedImage out{ImagePlane(h, w), x.height, x.width};
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx)
        out.image.at(c, y, xx) = x.at(c, std::min(y, x.height - 1), std::min(xx, x.width - 1));
  return out;
}

ImagePlane crop_image(const ImagePlane& x, int height, int width) {
  if (height > x.height || width > x.width || height <= 0 || width <= 0) {
    fail(ErrorCode::kDimension, "crop extents outside image");
  }
  ImagePlane out(height, width);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < height; ++y)
      for (int xx = 0; xx < width; ++xx) out.at(c, y, xx) = x.at(c, y, xx);
  return out;
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') tok.push_back(char(bytes[pos++]));
  if (tok.empty()) fail(ErrorCode::kFormat, "truncated PPM header");
  return tok;
}

int header_int(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  const auto tok = header_token(bytes, pos);
  if (!std::all_of(tok.begin(), tok.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }) ||
      tok.size() > 9) {
    fail(ErrorCode::kFormat, "bad PPM header field '" + tok + "'");
  }
  return std::stoi(tok);
}

}  // namespace

ImagePlane decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    fail(ErrorCode::kFormat, "only binary PPM (P6) images are supported");
  }
  std::size_t pos = 2;
  const int w = header_int(bytes, pos);
  const int h = header_int(bytes, pos);
  const int maxval = header_int(bytes, pos);
  if (w <= 0 || h <= 0) fail(ErrorCode::kFormat, "PPM with empty extents");
  if (maxval != 255) fail(ErrorCode::kFormat, "only 8-bit PPM (maxval 255) is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail(ErrorCode::kFormat, "malformed PPM header");
  ++pos;
  const std::size_t need = std::size_t(w) * std::size_t(h) * 3;
  if (bytes.size() - pos < need) fail(ErrorCode::kFormat, "truncated PPM pixel data");
  ImagePlane img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = float(bytes[pos++]) / 255.0f;
  return img;
}

Bytes encode_ppm(const ImagePlane& image) {
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + std::size_t(image.width) * image.height * 3);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(image.at(c, y, x), 0.0f, 1.0f);
        out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
      }
  return out;
}

ImagePlane read_ppm(const std::string& path) { return decode_ppm(read_file(path)); }

void write_ppm(const std::string& path, const ImagePlane& image) { write_file(path, encode_ppm(image)); }

ImagePlane quantize_to_8bit(const ImagePlane& image) {
  ImagePlane out = image;
  for (auto& v : out.values.data()) v = float(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)) / 255.0f;
  return out;
}

}  // namespace camsic
