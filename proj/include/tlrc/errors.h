// Copyright (c) the tlrc project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TLRC_ERRORS_H_
#define TLRC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace tlrc {

// Base class for all tlrc errors. Subclasses map to CLI exit codes in
// tools/tlrc_main.cc.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input data cannot be handled (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

// JPEG features outside the supported baseline subset.
class UnsupportedJpeg : public DataError {
 public:
  using DataError::DataError;
};

// Malformed JPEG stream: bad marker, truncated scan, undefined table.
class CorruptStream : public DataError {
 public:
  using DataError::DataError;
};

// A coefficient exceeds what the file's Huffman tables can encode.
class CategoryOverflow : public DataError {
 public:
  using DataError::DataError;
};

// Tensor/plane shape disagreement.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class StatsMismatch : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public DataError {
 public:
  using DataError::DataError;
};

// Range-coder desync or truncated substream.
class StreamCorrupt : public DataError {
 public:
  using DataError::DataError;
};

class AlphabetTooLarge : public Error {
 public:
  using Error::Error;
};

// Cross-component decode requested out of order.
class ComponentOrderViolation : public Error {
 public:
  using Error::Error;
};

// Container / model file problems.
class ChecksumMismatch : public DataError {
 public:
  using DataError::DataError;
};

class VersionError : public DataError {
 public:
  using DataError::DataError;
};

class MalformedContainer : public DataError {
 public:
  using DataError::DataError;
};

class ShapeMismatch : public DataError {
 public:
  using DataError::DataError;
};

// A decode/verify round trip failed (exit code 3). Correctness over metrics.
class LosslessViolation : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

class MissingCorpusForQp : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace tlrc

#endif  // TLRC_ERRORS_H_
