#pragma once

#include <stdexcept>
#include <string>

namespace speclab {

// Scenario/schema problems: malformed JSON, missing fields, bad parameter
// ranges. CLI maps these to exit code 2.
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Solver breakdowns: eigensolver non-convergence, ODE step underflow,
// overflow in a requested quantity. CLI exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// A certified bound failed to hold, or a build was refused because a
// prerequisite certificate is missing. CLI exit code 4.
struct CertificateError : std::runtime_error {
    explicit CertificateError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace speclab
