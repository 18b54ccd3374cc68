// Copyright 2026 The trajssl Authors
//
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

#ifndef TRAJSSL__ERRORS_HPP_
#define TRAJSSL__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace trajssl
{
/**
 * @brief Base class of every error raised by the library.
 *
 * `kind()` returns the stable error name used in CLI error lines.
 */
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
  virtual const char * kind() const noexcept = 0;
};

#define TRAJSSL_DECLARE_ERROR(Name)                                  \
  class Name : public Error                                          \
  {                                                                  \
  public:                                                            \
    using Error::Error;                                              \
    const char * kind() const noexcept override { return #Name; }    \
  }

// scenario_model
TRAJSSL_DECLARE_ERROR(DegeneratePolyline);
TRAJSSL_DECLARE_ERROR(HorizonOverflow);
TRAJSSL_DECLARE_ERROR(ScenarioRejected);
TRAJSSL_DECLARE_ERROR(RateMismatch);
TRAJSSL_DECLARE_ERROR(ParseError);
TRAJSSL_DECLARE_ERROR(InvalidScenario);
TRAJSSL_DECLARE_ERROR(IoError);

// synthgen
TRAJSSL_DECLARE_ERROR(InvalidProfile);

// sampler
TRAJSSL_DECLARE_ERROR(EmptyBank);
TRAJSSL_DECLARE_ERROR(InfeasibleHorizon);
TRAJSSL_DECLARE_ERROR(PairRejected);

// nn_core
TRAJSSL_DECLARE_ERROR(ShapeError);
TRAJSSL_DECLARE_ERROR(BatchTooSmall);
TRAJSSL_DECLARE_ERROR(StoreMismatch);
TRAJSSL_DECLARE_ERROR(NumericFault);
TRAJSSL_DECLARE_ERROR(CheckpointMismatch);

// ssl
TRAJSSL_DECLARE_ERROR(DegenerateEmbedding);
TRAJSSL_DECLARE_ERROR(EmptyTarget);

// finetune_eval
TRAJSSL_DECLARE_ERROR(EmptyEvaluation);

// cli
TRAJSSL_DECLARE_ERROR(ConfigError);

#undef TRAJSSL_DECLARE_ERROR

}  // namespace trajssl

#endif  // TRAJSSL__ERRORS_HPP_
