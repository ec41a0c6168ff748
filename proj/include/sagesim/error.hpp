/* Copyright 2026 The sagesim Authors. All Rights Reserved.

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

#ifndef SAGESIM_ERROR_HPP_
#define SAGESIM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sagesim {

enum class ErrorCode {
  kInvalidArgument = 1,
  kShapeMismatch,
  kRangeViolation,
  kIo,
  kParse,
  kDegenerate,
  kOverflow,
};

// Every failure raised by the core carries one of the codes above so the C
// API can map it onto a status value without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sagesim

#endif  // SAGESIM_ERROR_HPP_
