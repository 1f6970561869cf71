// Copyright (c) 2026 The dsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSV_COMMON_ERROR_H_
#define DSV_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace dsv {

// Bad user-supplied data or arguments: malformed files, out-of-range fields,
// contract violations detectable before any heavy work. The CLI maps these
// to exit status 1; every other exception maps to 2.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Failure while running a job (I/O, numerical breakdown).
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dsv

#endif  // DSV_COMMON_ERROR_H_
