/*
 * Copyright 2026 The hdrbench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace hdrbench {

/// Bad input: malformed files, out-of-range samples, inconsistent
/// configuration. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Something failed while doing work: I/O, child processes, corrupt stores.
/// The CLI maps these to exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizeMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SampleRangeError : public ValidationError {
 public:
  SampleRangeError(const std::string& what, std::size_t sample_index)
      : ValidationError(what), sample_index_(sample_index) {}

  /// Index of the offending sample counted from the start of the file.
  std::size_t sample_index() const { return sample_index_; }

 private:
  std::size_t sample_index_;
};

class DepthError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class ProcessError : public RuntimeError {
 public:
  ProcessError(const std::string& what, int exit_code)
      : RuntimeError(what), exit_code_(exit_code) {}

  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace hdrbench
