#pragma once

#include <stdexcept>

namespace sgg {

// Base for all library errors so callers can catch the family at once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed scene-graph input: self-loop, out-of-range node index,
// BG predicate id on an FG edge, inconsistent loss maps, bad dimensions.
struct ValidationError : Error {
  using Error::Error;
};

// Input on which the requested quantity is undefined
// (density of a 1-node graph, stats of an empty dataset, ...).
struct DegenerateInputError : Error {
  using Error::Error;
};

// Batch with no FG edges: the decomposed edge terms are undefined.
struct DegenerateBatchError : Error {
  using Error::Error;
};

// Freq lookup for a subject/object class pair never seen in training,
// queried with smoothing = 0.
struct UnseenPairError : Error {
  using Error::Error;
};

// File and serialization failures.
struct IoError : Error {
  using Error::Error;
};

}  // namespace sgg
