#ifndef PME_ERRORS_HPP
#define PME_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pme
{

// Base class for all library errors. The CLI maps ValidationError (and
// subclasses) to exit code 2 and everything else to exit code 1.
struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// Mismatched vector/matrix dimensions between conforming objects.
struct DimensionError : Error
{
  using Error::Error;
};

// Structured-grid topology unusable for the requested operation.
struct TopologyError : Error
{
  using Error::Error;
};

// Parameterization could not be registered against a baseline shape.
struct RegistrationError : Error
{
  using Error::Error;
};

// Curve fit residual exceeded its tolerance.
struct FitError : Error
{
  using Error::Error;
};

// Eigenproblem has no usable spectrum (e.g. all-zero data).
struct SpectrumError : Error
{
  using Error::Error;
};

// Inputs, configs, or archives failed validation.
struct ValidationError : Error
{
  using Error::Error;
};

// Artifacts from different pipeline stages do not belong together.
struct ProvenanceError : ValidationError
{
  using ValidationError::ValidationError;
};

// File could not be read, written, or parsed.
struct IoError : ValidationError
{
  using ValidationError::ValidationError;
};

}  // namespace pme

#endif  // PME_ERRORS_HPP
