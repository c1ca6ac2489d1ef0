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

#ifndef TSXAI_RANDOM_H_
#define TSXAI_RANDOM_H_

#include <cstdint>
#include <random>

namespace tsxai {

using RandomEngine = std::mt19937_64;

// Derives an independent stream seed from a master seed, a stream id (usually
// a sample index) and a purpose tag. Pure function of its arguments.
inline std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t stream,
                                std::uint64_t purpose = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(master),
                    static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(purpose),
                    static_cast<std::uint32_t>(purpose >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline RandomEngine MakeEngine(std::uint64_t master, std::uint64_t stream,
                               std::uint64_t purpose = 0) {
  return RandomEngine(DeriveSeed(master, stream, purpose));
}

}  // namespace tsxai

#endif  // TSXAI_RANDOM_H_
