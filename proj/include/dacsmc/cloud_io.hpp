// Copyright 2026 The dacsmc Authors
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

#ifndef DACSMC_CLOUD_IO_HPP
#define DACSMC_CLOUD_IO_HPP

#include <iosfwd>

#include "dacsmc/particle.hpp"

namespace dacsmc {

// Flat dumps of a cloud: node id, log mass, N, width, optional log-weights
// and the row-major paths. The binary form is little-endian and bit-exact;
// the CSV form prints 17 significant digits, which also round-trips.

void write_cloud_binary(const ParticleCloud& cloud, std::ostream& out);
/// Throws kInvalidData on a bad magic, version or truncated stream.
[[nodiscard]] ParticleCloud read_cloud_binary(std::istream& in);

void write_cloud_csv(const ParticleCloud& cloud, std::ostream& out);
[[nodiscard]] ParticleCloud read_cloud_csv(std::istream& in);

}  // namespace dacsmc

#endif  // DACSMC_CLOUD_IO_HPP
