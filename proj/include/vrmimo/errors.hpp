#pragma once

#include <stdexcept>
#include <string>

namespace vrmimo {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParam : public Error {
public:
    using Error::Error;
};

// Visibility region empty, duplicated or out of range.
class InvalidVR : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class NotPSD : public Error {
public:
    using Error::Error;
};

// Channel matrix is identically zero.
class DegenerateChannel : public Error {
public:
    using Error::Error;
};

// Channel matrix lacks full column rank; ZF is undefined.
class SingularChannel : public Error {
public:
    using Error::Error;
};

class InvalidScenario : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IOError : public Error {
public:
    using Error::Error;
};

} // namespace vrmimo
