// Copyright 2026 The trilink Authors
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

#ifndef TRILINK_ERRORS_H_
#define TRILINK_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace trilink {

/// Machine-readable failure categories. The CLI prints these verbatim.
enum class ErrorCode {
    kInvalidArgument,
    kInconsistentMeans,
    kUndefinedCorrelation,
    kDivisionByZero,
    kOverSubtraction,
    kEmptyInput,
    kNonConvergence,
    kDegenerateData,
    kUnidentifiable,
    kConfig,
    kIo,
};

std::string_view error_code_name(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

   private:
    ErrorCode code_;
};

}  // namespace trilink

#endif  // TRILINK_ERRORS_H_
