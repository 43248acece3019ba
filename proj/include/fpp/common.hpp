#pragma once
#include <cstdint>
#include <limits>
#include <string>

namespace fpp {

inline constexpr const char* kVersion = "0.1.0";

// Infimum over an empty path set: distances report this sentinel, never throw.
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();
inline constexpr std::int64_t kUnreachableHops = -1;

// Symbolic INFINITE for the alpha / beta limit regimes.
inline constexpr double kInfinite = std::numeric_limits<double>::infinity();

inline bool is_infinite(double x) { return x == kInfinite; }

// Decimal encoding used by every serializer; 17 significant digits round-trips
// IEEE doubles exactly.
std::string fmt_g17(double x);

}  // namespace fpp
