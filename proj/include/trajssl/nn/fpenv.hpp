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

#ifndef TRAJSSL__NN__FPENV_HPP_
#define TRAJSSL__NN__FPENV_HPP_

#if defined(__SSE__) || defined(__x86_64__)
#include <xmmintrin.h>
#define TRAJSSL_HAS_MXCSR 1
#endif

namespace trajssl::nn
{
/**
 * @brief Flush-to-zero and denormals-are-zero on the calling thread for the guard's lifetime.
 *
 * Training loops run under it: subnormal optimizer moments otherwise slow float kernels down by
 * large factors. A no-op on targets without MXCSR.
 */
class ScopedFlushDenormals
{
public:
  ScopedFlushDenormals() noexcept
  {
#ifdef TRAJSSL_HAS_MXCSR
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | kFlushToZero | kDenormalsAreZero);
#endif
  }

  ~ScopedFlushDenormals()
  {
#ifdef TRAJSSL_HAS_MXCSR
    _mm_setcsr(saved_);
#endif
  }

  ScopedFlushDenormals(const ScopedFlushDenormals &) = delete;
  ScopedFlushDenormals & operator=(const ScopedFlushDenormals &) = delete;

private:
  static constexpr unsigned int kFlushToZero = 0x8000;
  static constexpr unsigned int kDenormalsAreZero = 0x0040;
  unsigned int saved_{0};
};

}  // namespace trajssl::nn

#endif  // TRAJSSL__NN__FPENV_HPP_
