#pragma once

#include <stdexcept>
#include <string>

namespace o3dsp {

/// Non-finite or out-of-domain arguments.
struct InvalidInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A belief whose variance collapsed to zero or went negative.
struct DegenerateBeliefError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A posterior whose total unnormalized mass vanished or lost finiteness.
struct DegeneratePosteriorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed file content; the message carries frame/offset context.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace o3dsp
