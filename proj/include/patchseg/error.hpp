#pragma once

#include <stdexcept>
#include <string>

namespace patchseg {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

/// The masked image carries no energy, so no basis is defined for the region.
struct DegenerateRegion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace patchseg

namespace patchseg {

/// A one-against-all subproblem failed; carries the target region id.
struct RegionFailure : std::runtime_error {
  RegionFailure(int region_id, const std::string& what)
      : std::runtime_error("region " + std::to_string(region_id) + ": " + what), region(region_id) {}
  int region;
};

}  // namespace patchseg
