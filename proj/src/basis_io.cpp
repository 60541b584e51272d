#include "patchseg/basis_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "patchseg/error.hpp"

namespace patchseg {
namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return out;
}

}  // namespace

void write_basis(const std::filesystem::path& path, const PatchBasis& basis, BasisFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const nlohmann::json header = {{"m", basis.side()},
                                 {"K", basis.count()},
                                 {"format", format == BasisFormat::text ? "text" : "binary"}};
  out << header.dump() << '\n';
  if (format == BasisFormat::text) {
    out.precision(17);
    for (const Patch& p : basis.bases()) {
      const auto v = p.values();
      for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
      out << '\n';
    }
  } else {
    for (const Patch& p : basis.bases())
      for (double x : p.values()) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(x));
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
      }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

PatchBasis read_basis(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed basis header in " + path.string() + ": " + e.what());
  }
  if (!header.contains("m") || !header.contains("K"))
    throw IoError("basis header needs m and K: " + path.string());
  const auto m = header["m"].get<std::size_t>();
  const auto k = header["K"].get<std::size_t>();
  const std::string format = header.value("format", "text");
  const std::size_t n = m * m;

  std::vector<Patch> patches;
  patches.reserve(k);
  for (std::size_t row = 0; row < k; ++row) {
    std::vector<double> v(n);
    if (format == "binary") {
      for (double& x : v) {
        std::uint64_t bits = 0;
        in.read(reinterpret_cast<char*>(&bits), sizeof bits);
        if (!in) throw IoError("truncated binary basis: " + path.string());
        x = std::bit_cast<double>(to_little_endian(bits));
      }
    } else if (format == "text") {
      for (double& x : v)
        if (!(in >> x)) throw IoError("truncated text basis: " + path.string());
    } else {
      throw IoError("unknown basis format '" + format + "' in " + path.string());
    }
    patches.emplace_back(m, std::move(v));
  }
  return PatchBasis(std::move(patches));
}

ImageGrid basis_tiles(const PatchBasis& basis, std::size_t zoom) {
  const std::size_t m = basis.side();
  const std::size_t cell = m * zoom;
  const std::size_t width = basis.count() * cell + (basis.count() - 1);
  ImageGrid out(width, cell, 1.0);
  for (std::size_t k = 0; k < basis.count(); ++k) {
    const auto v = basis[k].values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double span = *hi - *lo;
    const std::size_t x0 = k * (cell + 1);
    for (std::size_t y = 0; y < cell; ++y)
      for (std::size_t x = 0; x < cell; ++x) {
        const double raw = v[(y / zoom) * m + (x / zoom)];
        out(x0 + x, y) = span > 0.0 ? (raw - *lo) / span : 0.5;
      }
  }
  return out;
}

}  // namespace patchseg
