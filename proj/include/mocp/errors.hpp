#pragma once

#include <stdexcept>
#include <string>

namespace mocp {

//! Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! A parameter or configuration value is outside its admissible range.
class InvalidConfig : public Error
{
public:
  using Error::Error;
};

//! Input data violates a precondition (non-finite value, shape mismatch, ...).
class InvalidData : public Error
{
public:
  using Error::Error;
};

//! A conformity score asked a base predictor for something it cannot provide.
class CapabilityError : public Error
{
public:
  using Error::Error;
};

//! Numerical breakdown: zero density under importance sampling, degenerate
//! thresholds, failed factorizations.
class NumericalError : public Error
{
public:
  using Error::Error;
};

} // namespace mocp
