#include "patchseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "patchseg/error.hpp"

namespace patchseg {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// PGM header tokens may be separated by whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

ImageGrid read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (next_token(in) != "P5") throw IoError("not a binary PGM (P5): " + path.string());
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(next_token(in));
    h = std::stoul(next_token(in));
    maxval = std::stoul(next_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PGM header: " + path.string());
  }
  if (w == 0 || h == 0 || maxval == 0 || maxval > 255)
    throw IoError("unsupported PGM (only 8-bit): " + path.string());
  std::vector<std::uint8_t> raw(w * h);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError("truncated PGM: " + path.string());
  std::vector<double> values(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) values[i] = raw[i] / static_cast<double>(maxval);
  return ImageGrid(w, h, std::move(values));
}

void write_pgm(const std::filesystem::path& path, const ImageGrid& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<std::uint8_t> raw(img.size());
  const auto v = img.values();
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = quantize(v[i]);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

ImageGrid read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  // libpng performs the luma conversion for color inputs.
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  std::vector<double> values(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) values[i] = raw[i] / 255.0;
  return ImageGrid(image.width, image.height, std::move(values));
}

void write_png_buffer(const std::filesystem::path& path, std::size_t w, std::size_t h,
                      std::uint32_t format, const std::vector<std::uint8_t>& raw) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, raw.data(), 0, nullptr))
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
}

}  // namespace

ImageGrid read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw IoError("unsupported image extension: " + path.string());
}

void write_image(const std::filesystem::path& path, const ImageGrid& img) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return write_pgm(path, img);
  if (ext != ".png") throw IoError("unsupported image extension: " + path.string());
  std::vector<std::uint8_t> raw(img.size());
  const auto v = img.values();
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = quantize(v[i]);
  write_png_buffer(path, img.width(), img.height(), PNG_FORMAT_GRAY, raw);
}

void write_png_rgb(const std::filesystem::path& path, const RgbImage& img) {
  if (img.rgb.size() != img.width * img.height * 3) throw InvalidArgument("RGB buffer size mismatch");
  write_png_buffer(path, img.width, img.height, PNG_FORMAT_RGB, img.rgb);
}

ImageGrid normalize_range(const ImageGrid& img) {
  const auto v = img.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  ImageGrid out(img.width(), img.height(), 0.0);
  const double span = *hi - *lo;
  if (span <= 0.0) return out;
  auto o = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) o[i] = (v[i] - *lo) / span;
  return out;
}

RgbImage contour_overlay(const ImageGrid& img, const ImageGrid& phi) {
  if (!img.same_shape(phi)) throw DimensionMismatch("overlay image and phi differ in shape");
  const ImageGrid shown = normalize_range(img);
  RgbImage out{img.width(), img.height(), std::vector<std::uint8_t>(img.size() * 3)};
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      const bool inside = phi(x, y) > 0.0;
      bool edge = false;
      if (x + 1 < img.width() && (phi(x + 1, y) > 0.0) != inside) edge = true;
      if (y + 1 < img.height() && (phi(x, y + 1) > 0.0) != inside) edge = true;
      std::uint8_t* px = out.rgb.data() + 3 * (y * img.width() + x);
      if (edge) {
        px[0] = 255;
        px[1] = 0;
        px[2] = 0;
      } else {
        px[0] = px[1] = px[2] = quantize(shown(x, y));
      }
    }
  }
  return out;
}

}  // namespace patchseg
