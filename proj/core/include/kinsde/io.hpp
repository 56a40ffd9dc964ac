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

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kinsde/core_model.hpp"

namespace kinsde
{
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_double(double v);
/// Locale-independent parse of the whole string; throws ValidationError.
double parse_double(std::string_view s);

/// Flat `key = value` configuration with `#` comments.
class KvConfig
{
public:
    struct Entry
    {
        std::string value;
        int line = 0;
        std::string text;
    };

    /// Throws ValidationError naming the offending line on syntax errors,
    /// duplicate keys, or (when `known` is given) unknown keys.
    static KvConfig parse(std::string_view text, const std::set<std::string>* known = nullptr);
    static KvConfig load(const std::filesystem::path& path, const std::set<std::string>* known = nullptr);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::map<std::string, Entry>& entries() const { return entries_; }
    void set(const std::string& key, std::string value);

    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key, double fallback) const;
    long long integer(const std::string& key, long long fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::vector<double> list(const std::string& key, std::vector<double> fallback) const;

    /// Sorted `key = value` lines; the config hash is FNV-1a 64 of this text.
    std::string canonical() const;
    std::uint64_t hash() const { return fnv1a64(canonical()); }

private:
    std::map<std::string, Entry> entries_;
};

SimConfig sim_config_from(const KvConfig& kv);
/// Core keys of a SimConfig in `key = value` form.
std::string to_kv(const SimConfig& cfg);

/// CSV with a `# config_hash=<hex>` first line and a fixed header.
class CsvWriter
{
public:
    CsvWriter(const std::filesystem::path& path, const std::string& config_hash, std::vector<std::string> header);
    /// Flushes to disk; throws nothing, so call close() to observe I/O errors.
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void close();
    void row(const std::vector<double>& values);
    void row_text(const std::vector<std::string>& cells);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::size_t columns_;
    std::string buffer_;
    bool closed_ = false;
};

struct CsvTable
{
    std::string config_hash;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

struct SnapshotMeta
{
    std::string config_hash;
    std::uint64_t seed = 0;
    double time = 0.0;
    std::size_t N = 0;
    int d1 = 1;
    int d2 = 1;
};

/// Writes `<base>.bin` (little-endian float64: x block, y block, weights)
/// and the `<base>.json` sidecar.
void write_snapshot(const std::filesystem::path& base, const EmpiricalLaw& law, const SnapshotMeta& meta);
EmpiricalLaw read_snapshot(const std::filesystem::path& base, SnapshotMeta* meta = nullptr);

struct Manifest
{
    std::string config_text;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;
    std::string command;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
    std::size_t steps = 0;
};

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

/// Hash embedded in an output file (CSV comment line, JSON field, or
/// snapshot sidecar); empty when none is found.
std::string embedded_hash(const std::filesystem::path& path);

struct VerifyResult
{
    bool ok = true;
    std::vector<std::string> problems;
};

/// Checks the manifest's own config text against its hash and every listed
/// output against the manifest hash. Relative outputs resolve next to the manifest.
VerifyResult verify_manifest(const std::filesystem::path& manifest_path);
}  // namespace kinsde
