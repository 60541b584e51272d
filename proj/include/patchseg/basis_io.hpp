#pragma once

#include <filesystem>

#include "patchseg/eigenpatch.hpp"
#include "patchseg/image_io.hpp"

namespace patchseg {

enum class BasisFormat { text, binary };

/// One JSON header line {"m":..,"K":..,"format":"text"|"binary"} followed by
/// K rows of m^2 reals, row-major: whitespace-separated decimal text, or
/// little-endian IEEE-754 doubles.
void write_basis(const std::filesystem::path& path, const PatchBasis& basis,
                 BasisFormat format = BasisFormat::text);
PatchBasis read_basis(const std::filesystem::path& path);

/// Bases side by side, each stretched to its own [min, max], separated by a
/// one-pixel gap and upscaled by `zoom`.
ImageGrid basis_tiles(const PatchBasis& basis, std::size_t zoom = 4);

}  // namespace patchseg
