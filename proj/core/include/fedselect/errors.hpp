/*
 * Copyright 2026 The fedselect Authors
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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fedselect {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyCohort : public Error {
 public:
  EmptyCohort() : Error("cohort is empty") {}
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class KeyOutOfRange : public Error {
 public:
  KeyOutOfRange(std::uint64_t key, std::uint64_t keyspace)
      : Error("select key " + std::to_string(key) + " outside keyspace [0, " +
              std::to_string(keyspace) + ")") {}
  KeyOutOfRange(std::uint64_t key, std::uint64_t keyspace, std::size_t client,
                std::size_t position)
      : Error("select key " + std::to_string(key) + " outside keyspace [0, " +
              std::to_string(keyspace) + ") for client " +
              std::to_string(client) + " at position " +
              std::to_string(position)) {}
};

class BlockCollision : public Error {
 public:
  using Error::Error;
};

class KeyspaceOverflow : public Error {
 public:
  using Error::Error;
};

class TooManyKeys : public Error {
 public:
  using Error::Error;
};

class BadAlpha : public Error {
 public:
  using Error::Error;
};

class FeatureNotInSlice : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  EmptyDataset() : Error("dataset is empty") {}
  using Error::Error;
};

class CohortTooLarge : public Error {
 public:
  using Error::Error;
};

class BadConfig : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class UnknownKey : public Error {
 public:
  explicit UnknownKey(const std::string& path)
      : Error("unknown config key: " + path) {}
};

class ConfigConflict : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedselect
