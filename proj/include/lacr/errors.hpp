#pragma once

#include <stdexcept>
#include <string>

namespace lacr {

// Base for every error raised by the engine. Each subclass maps onto one
// failure category so callers (and the CLI) can react per category.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidStanceError : public Error {
public:
    using Error::Error;
};

class DuplicateNodeError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class MissingParameterError : public Error {
public:
    using Error::Error;
};

// Dataset / embedding problems: unresolved keys, unknown themes, bad records.
class DataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class TrainingDivergenceError : public Error {
public:
    using Error::Error;
};

class UndefinedAcsError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

// Malformed or truncated files.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace lacr
