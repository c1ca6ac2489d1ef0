/*
 * Copyright 2026 The tsxai Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TSXAI_ERRORS_H_
#define TSXAI_ERRORS_H_

#include <stdexcept>
#include <string>

namespace tsxai {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or document.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Tensor / matrix / layer dimensions that do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside its documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Division by an exact zero, non-finite values, ill-conditioned systems.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Experiment configuration problems; mapped to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tsxai

#endif  // TSXAI_ERRORS_H_
