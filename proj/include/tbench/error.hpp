#pragma once

#include <stdexcept>
#include <string>

namespace tbench {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, missing file, schema violation. Exit code 1.
class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// A statistic that does not exist for the given sample, e.g. a sample
// standard deviation at n=1 (the n-1 divisor).
class UndefinedStatisticError : public Error {
public:
  using Error::Error;
};

// Zero-variance or otherwise degenerate input to a hypothesis test. Raised
// instead of returning NaN p-values.
class DegenerateSampleError : public Error {
public:
  using Error::Error;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

// Non-finite loss or gradient during training; message carries epoch/step.
class NumericError : public Error {
public:
  using Error::Error;
};

}  // namespace tbench
