#pragma once

// Minimal PGM (P2 ascii / P5 binary, maxval <= 255) reading and writing for
// image arguments compared by MSE or SSIM.

#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipa/process_ir.hpp"

namespace ipa::bench {

class ImageFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class PgmReader {
 public:
  explicit PgmReader(std::string data) : d_(std::move(data)) {}

  std::string magic() {
    if (d_.size() < 2) throw ImageFormatError("truncated PGM header");
    pos_ = 2;
    return d_.substr(0, 2);
  }

  unsigned long number() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < d_.size() && std::isdigit(static_cast<unsigned char>(d_[pos_]))) ++pos_;
    if (start == pos_) throw ImageFormatError("malformed PGM: expected a number");
    return std::stoul(d_.substr(start, pos_ - start));
  }

  // Exactly one whitespace byte separates the header from binary data.
  std::size_t binary_start() const { return pos_ + 1; }
  const std::string& data() const { return d_; }

 private:
  void skip() {
    while (pos_ < d_.size()) {
      if (std::isspace(static_cast<unsigned char>(d_[pos_]))) ++pos_;
      else if (d_[pos_] == '#')
        while (pos_ < d_.size() && d_[pos_] != '\n') ++pos_;
      else break;
    }
  }

  std::string d_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageFormatError("cannot open image '" + path.string() + "'");
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  detail::PgmReader r(std::move(bytes));
  const std::string magic = r.magic();
  if (magic != "P2" && magic != "P5") throw ImageFormatError("'" + path.string() + "' is not a PGM (P2/P5) file");
  const auto cols = r.number();
  const auto rows = r.number();
  const auto maxval = r.number();
  if (cols == 0 || rows == 0) throw ImageFormatError("PGM image has zero size");
  if (maxval == 0 || maxval > 255) throw ImageFormatError("PGM maxval must be in [1, 255]");
  std::vector<double> px;
  px.reserve(rows * cols);
  const double scale = 255.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (std::size_t i = 0; i < rows * cols; ++i) {
      const auto v = r.number();
      if (v > maxval) throw ImageFormatError("PGM sample exceeds maxval");
      px.push_back(static_cast<double>(v) * scale);
    }
  } else {
    const std::size_t start = r.binary_start();
    if (r.data().size() < start + rows * cols) throw ImageFormatError("truncated PGM raster");
    for (std::size_t i = 0; i < rows * cols; ++i) {
      const auto v = static_cast<unsigned char>(r.data()[start + i]);
      if (v > maxval) throw ImageFormatError("PGM sample exceeds maxval");
      px.push_back(static_cast<double>(v) * scale);
    }
  }
  return GrayImage(rows, cols, std::move(px));
}

/// Writes an ascii (P2) PGM; intensities are rounded to integers.
inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ostringstream os;
  os << "P2\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (std::size_t c = 0; c < img.cols(); ++c) {
      if (c) os << ' ';
      os << static_cast<int>(img.at(r, c) + 0.5);
    }
    os << '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageFormatError("cannot write image '" + path.string() + "'");
  out << os.str();
}

/// Loads pixels for every image argument lacking them, resolving paths
/// against `base`. Returns one message per image that could not be loaded.
inline std::vector<std::string> resolve_image_pixels(Process& p, const std::filesystem::path& base) {
  std::vector<std::string> problems;
  for (auto& st : p.statements)
    for (auto& a : st.args) {
      if (a.kind() != ArgKind::image) continue;
      auto& im = a.as_image();
      if (im.pixels) continue;
      try {
        im.pixels = read_pgm(base / im.path);
      } catch (const std::exception& ex) {
        problems.emplace_back(ex.what());
      }
    }
  return problems;
}

}  // namespace ipa::bench
