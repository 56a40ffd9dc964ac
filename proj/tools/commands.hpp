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

#include <filesystem>
#include <span>
#include <string>

namespace kinsde::cli
{
struct Options
{
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::filesystem::path replay;
    int workers = -1;  ///< -1: use the config value
};

int run_simulate(const Options& opts);
int run_ergodicity(const Options& opts);
int run_lyapunov_check(const Options& opts);
int run_zvonkin(const Options& opts);
int run_khasminskii(const Options& opts);
int run_mkv_picard(const Options& opts);
int run_mkv_sweep(const Options& opts);
int run_h_bound(const Options& opts);
int run_verify(const std::filesystem::path& manifest);

struct Command
{
    const char* name;
    const char* help;
    int (*fn)(const Options&);
};

/// Every subcommand that takes an experiment config.
std::span<const Command> command_table();

/// Rebuilds the config from a manifest and runs its command again into
/// opts.out_dir. opts.config is ignored.
int run_rerun(const std::filesystem::path& manifest, const Options& opts);
}  // namespace kinsde::cli
