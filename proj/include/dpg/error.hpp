#pragma once

#include <stdexcept>
#include <string>

namespace dpg {

/// An id, offset, or parameter fell outside the range a contract allows.
class RangeError : public std::out_of_range {
public:
    explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

/// Invalid configuration or construction parameters (sizes, layouts, regions).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Two inputs that must describe the same computation disagree
/// (e.g. a rid sequence inconsistent with the record runs built from it).
class ConsistencyError : public std::runtime_error {
public:
    explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

/// A foreign key did not resolve in the referenced relation's index.
class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

/// I/O or file-format failure when persisting/loading binary files.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dpg
