/* Copyright 2026 The CIMLeak Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CIMLEAK_ERRORS_HPP_
#define CIMLEAK_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cimleak {

// Argument outside the mathematical domain of an operation (negative voltage,
// level index out of range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent or invalid configuration (geometry, ratios, device ranges).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operand shapes do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed serialized data: bad magic, truncated payload, broken markers.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failure; the message always carries the offending path.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace cimleak

#endif  // CIMLEAK_ERRORS_HPP_
