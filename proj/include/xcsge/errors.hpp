#pragma once

#include <stdexcept>
#include <string>

namespace xcsge {

/// Base class of all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonFiniteInput : Error { using Error::Error; };
struct EmptyEnsemble : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };
struct LeadtimeOutOfRange : Error { using Error::Error; };
struct AllMembersMasked : Error { using Error::Error; };
struct InvalidLagCount : Error { using Error::Error; };
struct MissingHistory : Error { using Error::Error; };
struct EmptyGrid : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct MissingPrediction : Error { using Error::Error; };
struct IncompleteCoverage : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SchemaMismatch : Error { using Error::Error; };
struct TimestampOrderError : Error { using Error::Error; };
struct ShiftTooLarge : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };
struct TooFewGroups : Error { using Error::Error; };
struct EmptyFitSet : Error { using Error::Error; };
struct NonPositiveMax : Error { using Error::Error; };
struct EmptySet : Error { using Error::Error; };
struct ZeroVariance : Error { using Error::Error; };
struct ZeroReference : Error { using Error::Error; };
struct UnknownLabel : Error { using Error::Error; };
struct DegenerateShape : Error { using Error::Error; };
struct UnsupportedAlpha : Error { using Error::Error; };
struct UnsupportedA : Error { using Error::Error; };
struct SerializationError : Error { using Error::Error; };

} // namespace xcsge
