#pragma once

#include <stdexcept>
#include <string>

namespace eden {

/// Caller supplied a value outside the operation's domain.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// The operation is not defined for this kind of distribution (e.g. a
/// truncated support passed to a full-vocabulary routine).
class UnsupportedOperation : public std::logic_error {
public:
    explicit UnsupportedOperation(const std::string& what) : std::logic_error(what) {}
};

/// A next-token source failed: transport error, bad payload, empty support.
class ProviderError : public std::runtime_error {
public:
    explicit ProviderError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace eden
