#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mapfree {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

class BehindCameraError : public Error {
 public:
  using Error::Error;
};

class InvalidDepthError : public Error {
 public:
  using Error::Error;
};

// Minimal sample is collinear, coincident or otherwise rank deficient.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

class CheiralityError : public Error {
 public:
  using Error::Error;
};

class NoConsensusError : public Error {
 public:
  using Error::Error;
};

class ScaleFailureError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file content. The message always carries the file path and,
// for text formats, the 1-based line number (byte offset for binary ones).
class FormatError : public Error {
 public:
  FormatError(const std::string& path, std::size_t line,
              const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what),
        path_(path),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

}  // namespace mapfree
