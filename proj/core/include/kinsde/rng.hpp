// Copyright 2026 The kinsde Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>

namespace kinsde
{
/// Philox4x32-10 block cipher used as a counter-based generator.
/// The output is a pure function of (counter, key), so any particle or step
/// can be regenerated without replaying a sequential stream.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// Purpose tags separate the random streams drawn from one seed.
enum class StreamTag : std::uint32_t
{
    increments = 1,
    initial_law = 2,
    bootstrap = 3,
    sampling = 4,
    spot_check = 5,
};

/// Addresses one substream: (seed, tag, stream id). Stream ids are particle
/// indices for simulation streams and replicate indices for bootstraps.
struct StreamAddress
{
    std::uint64_t seed = 0;
    StreamTag tag = StreamTag::increments;
    std::uint64_t stream = 0;
};

/// index-th standard normal of a substream (Box-Muller on one Philox block
/// per pair of indices).
double normal_at(const StreamAddress& addr, std::uint64_t index);

/// index-th uniform in [0, 1) of a substream.
double uniform_at(const StreamAddress& addr, std::uint64_t index);

/// Sequential reader over normal_at that reuses the second Box-Muller value.
/// Yields exactly the values normal_at(addr, start), normal_at(addr, start+1), ...
class NormalStream
{
public:
    explicit NormalStream(StreamAddress addr, std::uint64_t start = 0) : addr_(addr), next_(start) {}

    double next();
    std::uint64_t position() const { return next_; }

private:
    StreamAddress addr_;
    std::uint64_t next_;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    std::array<double, 2> cache_{};
};
}  // namespace kinsde
