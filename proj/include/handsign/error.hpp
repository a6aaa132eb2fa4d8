#pragma once

#include <stdexcept>
#include <string>

namespace handsign {

// Every failure the library reports derives from Error. The subclasses are
// thin tags so callers (the CLI in particular) can map them to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class AllZeroImage : public DataError {
public:
    AllZeroImage() : DataError("depth image has no nonzero pixel") {}
    using DataError::DataError;
};

class DimensionMismatch : public DataError {
public:
    using DataError::DataError;
};

class ContentLargerThanTarget : public DataError {
public:
    using DataError::DataError;
};

class WrongInputSize : public DataError {
public:
    using DataError::DataError;
};

class EmptyData : public DataError {
public:
    using DataError::DataError;
};

class LabelOutOfRange : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class UnknownLetter : public DataError {
public:
    using DataError::DataError;
};

class MissingFile : public DataError {
public:
    using DataError::DataError;
};

class UnknownUser : public DataError {
public:
    using DataError::DataError;
};

class LengthMismatch : public DataError {
public:
    using DataError::DataError;
};

class EmptyInput : public DataError {
public:
    using DataError::DataError;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// A NaN or Inf showed up in model parameters or a loss.
class NumericFailure : public Error {
public:
    using Error::Error;
};

}  // namespace handsign
