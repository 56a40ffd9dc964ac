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

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "kinsde/errors.hpp"

namespace
{
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
}  // namespace

int main(int argc, char** argv)
{
    using namespace kinsde::cli;
    CLI::App app{"kinsde: kinetic SDE simulation and verification engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", KINSDE_VERSION);

    Options opts;
    const char* env_out = std::getenv("KINSDE_OUT_DIR");
    opts.out_dir = env_out != nullptr && *env_out != '\0' ? env_out : ".";
    std::filesystem::path manifest;

    int (*chosen)(const Options&) = nullptr;
    for (const Command& s : command_table())
    {
        CLI::App* sc = app.add_subcommand(s.name, s.help);
        sc->add_option("-c,--config", opts.config, "Experiment config (key = value)")->required()->check(CLI::ExistingFile);
        sc->add_option("-o,--out", opts.out_dir, "Output directory (default $KINSDE_OUT_DIR or .)");
        sc->add_option("-w,--workers", opts.workers, "Worker threads; never changes numeric output");
        if (std::string(s.name) == "ergodicity")
            sc->add_option("--replay", opts.replay, "Fit a recorded t,distance CSV instead of simulating")
                ->check(CLI::ExistingFile);
        sc->callback([&chosen, fn = s.fn] { chosen = fn; });
    }
    CLI::App* verify = app.add_subcommand("verify", "Check that every output embeds its manifest's config hash");
    verify->add_option("manifest", manifest, "Manifest JSON written by a previous run")->required()->check(CLI::ExistingFile);
    CLI::App* rerun = app.add_subcommand("rerun", "Run a manifest's command again from its stored config");
    rerun->add_option("manifest", manifest, "Manifest JSON written by a previous run")->required()->check(CLI::ExistingFile);
    rerun->add_option("-o,--out", opts.out_dir, "Output directory (default $KINSDE_OUT_DIR or .)");
    rerun->add_option("-w,--workers", opts.workers, "Worker threads; never changes numeric output");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try
    {
        if (verify->parsed()) return run_verify(manifest);
        if (rerun->parsed()) return run_rerun(manifest, opts);
        return chosen(opts);
    }
    catch (const kinsde::ValidationError& e)
    {
        std::cerr << "kinsde: invalid input: " << e.what() << "\n";
        return kExitValidation;
    }
    catch (const kinsde::NumericError& e)
    {
        std::cerr << "kinsde: numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    catch (const std::exception& e)
    {
        std::cerr << "kinsde: " << e.what() << "\n";
        return kExitNumeric;
    }
}
