#pragma once

#include <stdexcept>

namespace slmdp {

// model data violates the contract badly enough that sampling is meaningless
struct InvalidModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// an operation that needs a non-empty policy set got an empty one
struct EmptySet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// environment generator could not satisfy its constraints within its retry budget
struct GenerationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// a driver hit its configured episode or loop cap before finishing
struct ResourceExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// an exploration driver that promises covers could not synthesize one
struct CoverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// a parameter schedule evaluated to a non-finite or absurdly large count
struct Overflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace slmdp
