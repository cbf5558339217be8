#ifndef ARAUCANA_ERROR_HPP
#define ARAUCANA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace araucana {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data, schema or model files, and I/O failures.
class DataError : public Error {
public:
    using Error::Error;
};

/// An instance or argument does not conform to the schema / contract.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The black box failed to produce predictions.
class OracleError : public Error {
public:
    explicit OracleError(const std::string& what) : Error("oracle failure: " + what) {}
};

/// Bad command-line usage; maps to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace araucana

#endif
