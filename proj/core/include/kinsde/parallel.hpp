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

#include <cstddef>

#include <omp.h>

namespace kinsde
{
/// Static-schedule parallel loop over [0, n). Each index is visited by exactly
/// one thread and results must be written to index-owned slots, so the outcome
/// does not depend on `workers`.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn)
{
    const int threads = workers > 0 ? workers : omp_get_max_threads();
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1 && n > 1)
    for (long long i = 0; i < count; ++i)
    {
        fn(static_cast<std::size_t>(i));
    }
}
}  // namespace kinsde
