#pragma once

#include <stdexcept>
#include <string>

namespace fairflow {

// Base class for every error thrown by the library. Callers that only need
// coarse handling can catch this one type.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidEdge : Error { using Error::Error; };
struct DisconnectedGraph : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct InvalidParameter : Error { using Error::Error; };
struct RangeExhausted : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SchemaVersionMismatch : Error { using Error::Error; };
struct NonIntegralTravelTime : Error { using Error::Error; };
struct HorizonOverflow : Error { using Error::Error; };
struct GuardRailExceeded : Error { using Error::Error; };
struct NumericalFailure : Error { using Error::Error; };
struct UnknownVariable : Error { using Error::Error; };
struct ResidualTooLarge : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace fairflow
