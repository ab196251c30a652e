#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace projmap {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownFrame : public Error {
 public:
  explicit UnknownFrame(std::string name)
      : Error("unknown frame '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Frame tree construction failed (cycle, duplicate, disconnected, bad name).
class InvalidFrameTree : public Error {
 public:
  using Error::Error;
};

class InvalidMeasurement : public Error {
 public:
  using Error::Error;
};

class InvalidIntrinsics : public Error {
 public:
  using Error::Error;
};

class BehindCamera : public Error {
 public:
  using Error::Error;
};

class InvalidDepth : public Error {
 public:
  using Error::Error;
};

/// Malformed input document. `line()` is 1-based (0 when unknown);
/// `offset()` is a byte offset for binary payloads (0 when unused).
class ParseError : public Error {
 public:
  ParseError(const std::string& reason, std::size_t line = 0,
             std::size_t offset = 0, std::string field = {})
      : Error(format(reason, line, offset, field)),
        reason_(reason),
        line_(line),
        offset_(offset),
        field_(std::move(field)) {}

  const std::string& reason() const noexcept { return reason_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& reason, std::size_t line,
                            std::size_t offset, const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (offset > 0) out += "offset " + std::to_string(offset) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + reason;
  }

  std::string reason_;
  std::size_t line_;
  std::size_t offset_;
  std::string field_;
};

/// Camera matrix does not have pinhole shape (nonzero skew or bad last row).
class InconsistentK : public Error {
 public:
  using Error::Error;
};

class UnsupportedEncoding : public Error {
 public:
  using Error::Error;
};

class MissingFile : public Error {
 public:
  explicit MissingFile(std::string path)
      : Error("missing file '" + path + "'"), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Semantically invalid configuration (duplicate labels, bad color, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace projmap
