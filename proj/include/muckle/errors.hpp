#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace muckle {

/// Malformed byte strings: wrong key/ciphertext lengths, truncated wire data.
class EncodingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The randomness source could not deliver the requested bytes.
class RandomnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown algorithm identifier.
class RegistryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A key-schedule value was requested or derived before its dependencies.
class ScheduleOrderError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Misuse of a security-experiment harness (e.g. a forbidden oracle query).
class HarnessError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace muckle
