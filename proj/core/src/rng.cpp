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

#include "kinsde/rng.hpp"

#include <cmath>
#include <numbers>

namespace kinsde
{
namespace
{
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline PhiloxCounter philox_round(const PhiloxCounter& c, const PhiloxKey& k)
{
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

PhiloxCounter block_for(const StreamAddress& addr, std::uint64_t block)
{
    const PhiloxCounter ctr{static_cast<std::uint32_t>(block),
                            static_cast<std::uint32_t>(block >> 32),
                            static_cast<std::uint32_t>(addr.stream),
                            static_cast<std::uint32_t>((addr.stream >> 32) & 0xFFFFu) |
                                (static_cast<std::uint32_t>(addr.tag) << 16)};
    const PhiloxKey key{static_cast<std::uint32_t>(addr.seed),
                        static_cast<std::uint32_t>(addr.seed >> 32)};
    return philox4x32_10(ctr, key);
}

// 53-bit doubles: open at zero for the log argument, closed at zero for the angle.
inline double to_open_unit(std::uint32_t a, std::uint32_t b)
{
    const std::uint64_t bits = ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

inline double to_unit(std::uint32_t a, std::uint32_t b)
{
    const std::uint64_t bits = ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
}

std::array<double, 2> box_muller(const PhiloxCounter& r)
{
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}
}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key)
{
    ctr = philox_round(ctr, key);
    for (int round = 1; round < 10; ++round)
    {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
        ctr = philox_round(ctr, key);
    }
    return ctr;
}

double normal_at(const StreamAddress& addr, std::uint64_t index)
{
    return box_muller(block_for(addr, index >> 1))[index & 1u];
}

double uniform_at(const StreamAddress& addr, std::uint64_t index)
{
    const PhiloxCounter r = block_for(addr, index >> 1);
    return (index & 1u) ? to_unit(r[2], r[3]) : to_unit(r[0], r[1]);
}

double NormalStream::next()
{
    const std::uint64_t block = next_ >> 1;
    if (block != cached_block_)
    {
        cache_ = box_muller(block_for(addr_, block));
        cached_block_ = block;
    }
    return cache_[next_++ & 1u];
}
}  // namespace kinsde
