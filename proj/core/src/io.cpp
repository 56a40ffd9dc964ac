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

#include "kinsde/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "kinsde/errors.hpp"

namespace kinsde
{
namespace fs = std::filesystem;
using nlohmann::json;

namespace
{
std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw NumericError("write failed for " + path.string());
}

std::uint64_t parse_u64(std::string_view s)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ValidationError("expected an unsigned integer, got '" + std::string(s) + "'");
    return v;
}

std::vector<double> broadcast(std::vector<double> v, int dims, const char* key)
{
    if (v.size() == 1) return std::vector<double>(dims, v[0]);
    if (static_cast<int>(v.size()) != dims)
        throw ValidationError(std::string(key) + " needs 1 or d1 + d2 = " + std::to_string(dims) + " values");
    return v;
}
}  // namespace

std::uint64_t fnv1a64(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
    return s;
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s)
{
    s = trim(s);
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ValidationError("expected a number, got '" + std::string(s) + "'");
    return v;
}

KvConfig KvConfig::parse(std::string_view text, const std::set<std::string>* known)
{
    KvConfig cfg;
    int lineno = 0;
    for (std::string_view raw : split(text, '\n'))
    {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string shown = "line " + std::to_string(lineno) + ": " + std::string(trim(raw));
        if (eq == std::string_view::npos) throw ValidationError(shown + " (expected key = value)");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ValidationError(shown + " (empty key)");
        if (known != nullptr && known->count(key) == 0) throw ValidationError(shown + " (unknown key '" + key + "')");
        if (cfg.entries_.count(key)) throw ValidationError(shown + " (duplicate key '" + key + "')");
        cfg.entries_[key] = Entry{value, lineno, std::string(trim(raw))};
    }
    return cfg;
}

KvConfig KvConfig::load(const fs::path& path, const std::set<std::string>* known)
{
    return parse(read_file(path), known);
}

void KvConfig::set(const std::string& key, std::string value)
{
    std::string text = key + " = " + value;
    entries_[key] = Entry{std::move(value), 0, std::move(text)};
}

std::string KvConfig::str(const std::string& key, const std::string& fallback) const
{
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.value;
}

double KvConfig::num(const std::string& key, double fallback) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try
    {
        return parse_double(it->second.value);
    }
    catch (const ValidationError& e)
    {
        throw ValidationError("line " + std::to_string(it->second.line) + ": " + it->second.text + " (" + e.what() + ")");
    }
}

long long KvConfig::integer(const std::string& key, long long fallback) const
{
    const double v = num(key, static_cast<double>(fallback));
    if (v != std::floor(v) || std::abs(v) > 9.0e15)
        throw ValidationError("line " + std::to_string(entries_.at(key).line) + ": " + entries_.at(key).text +
                              " (expected an integer)");
    return static_cast<long long>(v);
}

bool KvConfig::boolean(const std::string& key, bool fallback) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second.value;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError("line " + std::to_string(it->second.line) + ": " + it->second.text + " (expected true or false)");
}

std::vector<double> KvConfig::list(const std::string& key, std::vector<double> fallback) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<double> out;
    try
    {
        for (std::string_view part : split(it->second.value, ',')) out.push_back(parse_double(part));
    }
    catch (const ValidationError& e)
    {
        throw ValidationError("line " + std::to_string(it->second.line) + ": " + it->second.text + " (" + e.what() + ")");
    }
    return out;
}

std::string KvConfig::canonical() const
{
    std::string out;
    for (const auto& [k, e] : entries_) out += k + " = " + e.value + "\n";
    return out;
}

SimConfig sim_config_from(const KvConfig& kv)
{
    SimConfig c;
    c.T = kv.num("T", c.T);
    c.h = kv.num("h", c.h);
    const long long n = kv.integer("N", static_cast<long long>(c.N));
    if (n < 1) throw ValidationError("N must be >= 1");
    c.N = static_cast<std::size_t>(n);
    if (kv.has("seed")) c.seed = parse_u64(kv.str("seed", "1"));
    c.d1 = static_cast<int>(kv.integer("d1", c.d1));
    c.d2 = static_cast<int>(kv.integer("d2", c.d2));
    c.m = static_cast<int>(kv.integer("m", c.d2));
    if (c.d1 < 1 || c.d2 < 1 || c.m < 1) throw ValidationError("dimensions d1, d2, m must be >= 1");
    c.scheme = scheme_from_string(kv.str("scheme", "euler"));
    const int dims = c.d1 + c.d2;
    c.hist.min = broadcast(kv.list("hist.min", {-5.0}), dims, "hist.min");
    c.hist.max = broadcast(kv.list("hist.max", {5.0}), dims, "hist.max");
    const std::vector<double> bins = broadcast(kv.list("hist.bins", {20.0}), dims, "hist.bins");
    c.hist.bins.clear();
    for (double b : bins)
    {
        if (b != std::floor(b)) throw ValidationError("hist.bins must be integers");
        c.hist.bins.push_back(static_cast<int>(b));
    }
    for (int a = 0; a < dims; ++a)
        if (!(c.hist.max[a] > c.hist.min[a])) throw ValidationError("hist.max must exceed hist.min on every axis");
    c.store_increments = kv.boolean("store_increments", false);
    const long long re = kv.integer("record_every", 0);
    if (re < 0) throw ValidationError("record_every must be >= 0");
    c.record_every = static_cast<std::size_t>(re);
    c.workers = static_cast<int>(kv.integer("workers", 0));
    return c;
}

std::string to_kv(const SimConfig& c)
{
    const auto join = [](const auto& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            if (i) s += ",";
            s += format_double(static_cast<double>(v[i]));
        }
        return s;
    };
    std::ostringstream os;
    os << "T = " << format_double(c.T) << "\n"
       << "h = " << format_double(c.h) << "\n"
       << "N = " << c.N << "\n"
       << "seed = " << c.seed << "\n"
       << "d1 = " << c.d1 << "\n"
       << "d2 = " << c.d2 << "\n"
       << "m = " << c.m << "\n"
       << "scheme = " << to_string(c.scheme) << "\n"
       << "hist.min = " << join(c.hist.min) << "\n"
       << "hist.max = " << join(c.hist.max) << "\n"
       << "hist.bins = " << join(c.hist.bins) << "\n"
       << "store_increments = " << (c.store_increments ? "true" : "false") << "\n"
       << "record_every = " << c.record_every << "\n";
    return os.str();
}

CsvWriter::CsvWriter(const fs::path& path, const std::string& config_hash, std::vector<std::string> header)
    : path_(path), columns_(header.size())
{
    buffer_ = "# config_hash=" + config_hash + "\n";
    for (std::size_t i = 0; i < header.size(); ++i) buffer_ += (i ? "," : "") + header[i];
    buffer_ += "\n";
}

CsvWriter::~CsvWriter()
{
    try
    {
        close();
    }
    catch (...)
    {
    }
}

void CsvWriter::close()
{
    if (closed_) return;
    closed_ = true;
    write_file(path_, buffer_);
}

void CsvWriter::row(const std::vector<double>& values)
{
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row_text(cells);
}

void CsvWriter::row_text(const std::vector<std::string>& cells)
{
    if (cells.size() != columns_) throw ValidationError("CSV row has the wrong number of columns");
    for (std::size_t i = 0; i < cells.size(); ++i) buffer_ += (i ? "," : "") + cells[i];
    buffer_ += "\n";
}

std::vector<double> CsvTable::column(const std::string& name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("CSV has no column '" + name + "'");
    const auto idx = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[idx]);
    return out;
}

CsvTable read_csv(const fs::path& path)
{
    const std::string text = read_file(path);
    CsvTable t;
    bool have_header = false;
    for (std::string_view line : split(text, '\n'))
    {
        if (line.empty()) continue;
        if (line.front() == '#')
        {
            constexpr std::string_view tag = "# config_hash=";
            if (line.substr(0, tag.size()) == tag) t.config_hash = std::string(trim(line.substr(tag.size())));
            continue;
        }
        const auto cells = split(line, ',');
        if (!have_header)
        {
            for (auto c : cells) t.header.emplace_back(c);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) throw ValidationError("CSV row width differs from its header in " + path.string());
        std::vector<double> row;
        for (auto c : cells)
        {
            try
            {
                row.push_back(parse_double(c));
            }
            catch (const ValidationError&)
            {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw ValidationError("CSV has no header: " + path.string());
    return t;
}

namespace
{
void append_le(std::string& out, double v)
{
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double read_le(const char* p)
{
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return std::bit_cast<double>(bits);
}

fs::path with_suffix(const fs::path& base, const char* ext)
{
    fs::path p = base;
    p += ext;
    return p;
}
}  // namespace

void write_snapshot(const fs::path& base, const EmpiricalLaw& law, const SnapshotMeta& meta)
{
    const std::size_t n = law.size();
    std::string bin;
    bin.reserve(8 * n * (law.d1 + law.d2 + 1));
    for (double v : law.x) append_le(bin, v);
    for (double v : law.y) append_le(bin, v);
    for (std::size_t i = 0; i < n; ++i) append_le(bin, law.weight(i));
    write_file(with_suffix(base, ".bin"), bin);
    json side = {{"config_hash", meta.config_hash},
                 {"seed", meta.seed},
                 {"time", meta.time},
                 {"N", n},
                 {"d1", law.d1},
                 {"d2", law.d2},
                 {"layout", "float64-le: x[N*d1], y[N*d2], weights[N]"}};
    write_file(with_suffix(base, ".json"), side.dump(2) + "\n");
}

EmpiricalLaw read_snapshot(const fs::path& base, SnapshotMeta* meta)
{
    json side;
    try
    {
        side = json::parse(read_file(with_suffix(base, ".json")));
    }
    catch (const json::exception& e)
    {
        throw ValidationError(std::string("bad snapshot sidecar: ") + e.what());
    }
    EmpiricalLaw law;
    const std::size_t n = side.at("N").get<std::size_t>();
    law.d1 = side.at("d1").get<int>();
    law.d2 = side.at("d2").get<int>();
    const std::string bin = read_file(with_suffix(base, ".bin"));
    const std::size_t expected = 8 * n * static_cast<std::size_t>(law.d1 + law.d2 + 1);
    if (bin.size() != expected) throw ValidationError("snapshot size does not match its sidecar");
    const char* p = bin.data();
    law.x.resize(n * law.d1);
    law.y.resize(n * law.d2);
    law.weights.resize(n);
    for (double& v : law.x) v = read_le(p), p += 8;
    for (double& v : law.y) v = read_le(p), p += 8;
    for (double& v : law.weights) v = read_le(p), p += 8;
    if (meta != nullptr)
    {
        meta->config_hash = side.value("config_hash", "");
        meta->seed = side.value("seed", std::uint64_t{0});
        meta->time = side.value("time", 0.0);
        meta->N = n;
        meta->d1 = law.d1;
        meta->d2 = law.d2;
    }
    return law;
}

void write_manifest(const fs::path& path, const Manifest& m)
{
    json j = {{"config_text", m.config_text},
              {"config_hash", m.config_hash},
              {"seed", m.seed},
              {"version", m.version},
              {"command", m.command},
              {"outputs", m.outputs},
              {"wall_seconds", m.wall_seconds},
              {"steps", m.steps}};
    write_file(path, j.dump(2) + "\n");
}

Manifest read_manifest(const fs::path& path)
{
    try
    {
        const json j = json::parse(read_file(path));
        Manifest m;
        m.config_text = j.at("config_text").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.value("seed", std::uint64_t{0});
        m.version = j.value("version", "");
        m.command = j.value("command", "");
        m.outputs = j.value("outputs", std::vector<std::string>{});
        m.wall_seconds = j.value("wall_seconds", 0.0);
        m.steps = j.value("steps", std::size_t{0});
        return m;
    }
    catch (const json::exception& e)
    {
        throw ValidationError("bad manifest " + path.string() + ": " + e.what());
    }
}

std::string embedded_hash(const fs::path& path)
{
    const std::string ext = path.extension().string();
    if (ext == ".bin")
    {
        fs::path side = path;
        side.replace_extension(".json");
        return embedded_hash(side);
    }
    const std::string text = read_file(path);
    if (ext == ".json")
    {
        try
        {
            const json j = json::parse(text);
            return j.is_object() ? j.value("config_hash", "") : "";
        }
        catch (const json::exception&)
        {
            return "";
        }
    }
    constexpr std::string_view tag = "# config_hash=";
    if (text.compare(0, tag.size(), tag) == 0)
    {
        const auto end = text.find('\n');
        return std::string(trim(std::string_view(text).substr(tag.size(), end - tag.size())));
    }
    return "";
}

VerifyResult verify_manifest(const fs::path& manifest_path)
{
    VerifyResult r;
    const Manifest m = read_manifest(manifest_path);
    if (hex64(fnv1a64(m.config_text)) != m.config_hash)
    {
        r.ok = false;
        r.problems.push_back("manifest config text does not match its hash " + m.config_hash);
    }
    const fs::path dir = manifest_path.parent_path();
    for (const auto& out : m.outputs)
    {
        fs::path p = out;
        if (p.is_relative()) p = dir / p;
        if (!fs::exists(p))
        {
            r.ok = false;
            r.problems.push_back("missing output " + out);
            continue;
        }
        const std::string h = embedded_hash(p);
        if (h != m.config_hash)
        {
            r.ok = false;
            r.problems.push_back("hash mismatch in " + out + ": found '" + h + "', manifest has " + m.config_hash);
        }
    }
    return r;
}
}  // namespace kinsde
