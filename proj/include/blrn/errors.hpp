// Copyright 2026 The blrn Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BLRN_ERRORS_HPP_
#define BLRN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace blrn {

/// Error categories; they map one-to-one onto the C API status codes.
enum class Errc {
  kIo,
  kParse,
  kBuild,
  kFormat,
  kVersion,
  kChecksum,
  kNoRoute,
  kSnap,
  kInvalidArg,
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace blrn

#endif  // BLRN_ERRORS_HPP_
