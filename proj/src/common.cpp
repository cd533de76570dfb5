#include "wedgescope/common.hpp"

#include <string>

namespace wedge {

DimensionMismatch::DimensionMismatch(const std::string& context, std::size_t expected,
                                     std::size_t got)
    : Error(ErrorKind::dimension_mismatch, context + ": expected dimension " +
                                               std::to_string(expected) + ", got " +
                                               std::to_string(got)) {}

void require_dimension(const ParamVector& v, std::size_t expected, const char* context) {
  if (static_cast<std::size_t>(v.size()) != expected) {
    throw DimensionMismatch(context, expected, static_cast<std::size_t>(v.size()));
  }
}

bool all_finite(const ParamVector& v) { return v.allFinite(); }

void require_finite(const ParamVector& v, const char* context) {
  if (!v.allFinite()) throw InvalidArgument(std::string(context) + ": non-finite entry");
}

}  // namespace wedge
