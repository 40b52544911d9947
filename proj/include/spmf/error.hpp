#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spmf {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed something outside an operation's preconditions.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed skeleton file. Carries the source path and either a line
// number or a byte offset (whichever the parser could pin down; 0 = unknown).
class FormatError : public Error {
 public:
  FormatError(std::string path, std::size_t line, std::size_t byte_offset,
              const std::string& what)
      : Error(compose(path, line, byte_offset, what)),
        path_(std::move(path)),
        line_(line),
        byte_offset_(byte_offset) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  static std::string compose(const std::string& path, std::size_t line,
                             std::size_t byte_offset, const std::string& what) {
    std::string out = path.empty() ? std::string("<input>") : path;
    if (line > 0) out += ":" + std::to_string(line);
    if (byte_offset > 0) out += " (byte " + std::to_string(byte_offset) + ")";
    return out + ": " + what;
  }

  std::string path_;
  std::size_t line_;
  std::size_t byte_offset_;
};

// DistanceStats that cannot normalize anything (d_max <= 0, non-finite).
class StatsError : public Error {
 public:
  using Error::Error;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical failure during optimization (e.g. a non-finite gradient).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Sample data inconsistent with the model (label outside the class set...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace spmf
