#pragma once

#include <stdexcept>
#include <string>

namespace selfsim {

// Spec file could not be read or parsed.
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input violates a structural invariant (non-orthogonal part, ratio out of
// range, non-regular graph, broken multizipper axiom, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An iterative routine failed to converge within its iteration cap.
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A combinatorial enumeration exceeded its result cap.
struct CapExceededError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace selfsim
