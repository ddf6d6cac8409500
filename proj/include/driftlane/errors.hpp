#pragma once

#include <stdexcept>
#include <string>

namespace driftlane {

// CSV structure problems (ragged rows, bad header).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// A cell or scalar outside its legal domain.
class ValueError : public std::runtime_error {
public:
    explicit ValueError(const std::string& msg) : std::runtime_error(msg) {}
};

// Sensor present in data but missing from the metadata file, and similar.
class MetadataError : public std::runtime_error {
public:
    explicit MetadataError(const std::string& msg) : std::runtime_error(msg) {}
};

class InsufficientNeighborsError : public std::runtime_error {
public:
    explicit InsufficientNeighborsError(const std::string& msg) : std::runtime_error(msg) {}
};

class EmptyStreamError : public std::runtime_error {
public:
    explicit EmptyStreamError(const std::string& msg) : std::runtime_error(msg) {}
};

class InsufficientDataError : public std::runtime_error {
public:
    explicit InsufficientDataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite input where a finite value is required.
class InvalidInputError : public std::runtime_error {
public:
    explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Linear-algebra failure (singular system, overflow mid-update).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class UninitializedError : public std::runtime_error {
public:
    explicit UninitializedError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace driftlane
