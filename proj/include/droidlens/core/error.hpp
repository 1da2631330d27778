#pragma once

#include <stdexcept>
#include <string>

namespace droidlens {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated DEX input.
class DexError : public Error {
public:
    using Error::Error;
};

/// Malformed dataset files, bad labels, unknown verdicts.
class DataError : public Error {
public:
    using Error::Error;
};

/// A precondition on an argument was violated (k out of range, bad dimension, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Bad command line or configuration; maps to exit code 2 in the CLI.
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace droidlens
