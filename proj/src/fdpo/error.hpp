#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 the fdpo authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <stdexcept>
#include <string>

namespace fdpo {

enum class ErrorCode {
  InvalidArgument,
  Domain,
  Range,
  Shape,
  Support,
  Overflow,
  Infeasible,
  NoConvergence,
  Divergent,
  Config,
  Io,
  Internal,
};

/// Library-wide exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string const &message)
      : std::runtime_error(message), code_(code)
  {}

  ErrorCode code() const noexcept
  {
    return code_;
  }

 private:
  ErrorCode code_;
};

}  // namespace fdpo
