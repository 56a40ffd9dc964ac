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
#include <gtest/gtest.h>

#include <clocale>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "kinsde/errors.hpp"
#include "kinsde/experiment_config.hpp"
#include "kinsde/io.hpp"

using namespace kinsde;
namespace fs = std::filesystem;

namespace
{
fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("kinsde_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}
}  // namespace

TEST(Fnv, KnownValues)
{
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Doubles, RoundTripAndLocale)
{
    for (double v : {0.1, -1e-300, 3.141592653589793, 1e22, 0.0})
        EXPECT_EQ(parse_double(format_double(v)), v);
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_THROW(parse_double("1,5"), ValidationError);
    EXPECT_THROW(parse_double("abc"), ValidationError);
    EXPECT_TRUE(std::isinf(parse_double("inf")));
}

TEST(KvConfig, ParseAndCanonical)
{
    const KvConfig kv = KvConfig::parse("# comment\nN = 10\n  T=2.5   # trailing\n\nhist.bins = 3, 24\nflag = true\n");
    EXPECT_EQ(kv.integer("N", 0), 10);
    EXPECT_EQ(kv.num("T", 0.0), 2.5);
    EXPECT_EQ(kv.list("hist.bins", {}), (std::vector<double>{3.0, 24.0}));
    EXPECT_TRUE(kv.boolean("flag", false));
    EXPECT_EQ(kv.str("missing", "x"), "x");
    EXPECT_EQ(kv.canonical(), "N = 10\nT = 2.5\nflag = true\nhist.bins = 3, 24\n");
    const KvConfig reordered = KvConfig::parse("flag = true\nhist.bins = 3, 24\nT = 2.5\nN = 10\n");
    EXPECT_EQ(kv.hash(), reordered.hash());
}

TEST(KvConfig, UnknownKeyNamesLine)
{
    const std::set<std::string> known{"N", "T"};
    try
    {
        KvConfig::parse("N = 1\nbogus = 2\n", &known);
        FAIL() << "expected ValidationError";
    }
    catch (const ValidationError& e)
    {
        const std::string what = e.what();
        EXPECT_NE(what.find("line 2"), std::string::npos);
        EXPECT_NE(what.find("bogus = 2"), std::string::npos);
    }
}

TEST(KvConfig, SyntaxAndDuplicates)
{
    EXPECT_THROW(KvConfig::parse("N 10\n"), ValidationError);
    EXPECT_THROW(KvConfig::parse("N = 1\nN = 2\n"), ValidationError);
    EXPECT_THROW(KvConfig::parse("N = abc\n").integer("N", 0), ValidationError);
}

TEST(SimConfigKv, RoundTrip)
{
    SimConfig c;
    c.T = 2.0;
    c.h = 0.01;
    c.N = 77;
    c.seed = 123456789012345ULL;
    c.scheme = Scheme::tamed;
    c.hist = {{-1.0, -2.0}, {1.0, 2.0}, {4, 6}};
    c.record_every = 5;
    const SimConfig d = sim_config_from(KvConfig::parse(to_kv(c)));
    EXPECT_EQ(d.T, c.T);
    EXPECT_EQ(d.h, c.h);
    EXPECT_EQ(d.N, c.N);
    EXPECT_EQ(d.seed, c.seed);
    EXPECT_EQ(d.scheme, c.scheme);
    EXPECT_EQ(d.hist, c.hist);
    EXPECT_EQ(d.record_every, c.record_every);
}

TEST(Csv, WriteReadWithHash)
{
    const fs::path dir = scratch("csv");
    {
        CsvWriter w(dir / "a.csv", "00000000deadbeef", {"t", "distance"});
        w.row({0.0, 2.0});
        w.row({0.5, 0.1});
        w.close();
    }
    EXPECT_EQ(slurp(dir / "a.csv"), "# config_hash=00000000deadbeef\nt,distance\n0,2\n0.5,0.1\n");
    const CsvTable t = read_csv(dir / "a.csv");
    EXPECT_EQ(t.config_hash, "00000000deadbeef");
    EXPECT_EQ(t.column("distance"), (std::vector<double>{2.0, 0.1}));
    EXPECT_THROW(t.column("nope"), ValidationError);
}

TEST(Csv, LocaleIndependent)
{
    const char* old = std::setlocale(LC_NUMERIC, nullptr);
    const std::string saved = old ? old : "C";
    if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") == nullptr) GTEST_SKIP() << "de_DE locale not installed";
    EXPECT_EQ(format_double(0.25), "0.25");
    EXPECT_EQ(parse_double("0.25"), 0.25);
    std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST(Snapshot, RoundTrip)
{
    const fs::path dir = scratch("snap");
    EmpiricalLaw law;
    law.d1 = 1;
    law.d2 = 2;
    law.x = {1.0, -2.0};
    law.y = {0.5, 0.25, -4.0, 8.0};
    law.weights = {1.0, 0.0};
    write_snapshot(dir / "s", law, {"0123456789abcdef", 9, 1.5, 2, 1, 2});
    SnapshotMeta meta;
    const EmpiricalLaw back = read_snapshot(dir / "s", &meta);
    EXPECT_EQ(back.x, law.x);
    EXPECT_EQ(back.y, law.y);
    EXPECT_EQ(back.weights, law.weights);
    EXPECT_EQ(meta.config_hash, "0123456789abcdef");
    EXPECT_EQ(meta.seed, 9u);
    EXPECT_EQ(fs::file_size(dir / "s.bin"), 8u * (2 + 4 + 2));
    EXPECT_EQ(embedded_hash(dir / "s.bin"), "0123456789abcdef");
}

TEST(Manifest, VerifyDetectsMismatch)
{
    const fs::path dir = scratch("manifest");
    const KvConfig kv = KvConfig::parse("N = 3\n");
    const std::string hash = hex64(kv.hash());
    {
        CsvWriter w(dir / "out.csv", hash, {"a"});
        w.row({1.0});
    }
    Manifest m;
    m.config_text = kv.canonical();
    m.config_hash = hash;
    m.seed = 1;
    m.version = "test";
    m.command = "simulate";
    m.outputs = {"out.csv"};
    write_manifest(dir / "m.json", m);
    EXPECT_TRUE(verify_manifest(dir / "m.json").ok);
    const Manifest back = read_manifest(dir / "m.json");
    EXPECT_EQ(back.outputs, m.outputs);
    EXPECT_EQ(back.config_text, m.config_text);

    {
        CsvWriter w(dir / "out.csv", "ffffffffffffffff", {"a"});
        w.row({1.0});
    }
    const VerifyResult r = verify_manifest(dir / "m.json");
    EXPECT_FALSE(r.ok);
    ASSERT_FALSE(r.problems.empty());
    EXPECT_NE(r.problems.front().find("out.csv"), std::string::npos);
}

TEST(ExperimentConfig, BuildsShippedFamilies)
{
    const KvConfig kv = KvConfig::parse(
        "drift = example31\nsingular = riesz\nriesz.atoms = [(0,0.5)]\nriesz.alpha = 0.5\ninteraction = tanh_y\nkappa = 0.2\n"
        "init.kind = gaussian\ninit.spread = 0.5\ninit2.kind = dirac\ninit2.y = -2\n",
        &known_config_keys());
    const Experiment e = build_experiment(kv);
    EXPECT_TRUE(e.coeffs.interaction.has_value());
    EXPECT_DOUBLE_EQ(e.coeffs.interaction->kappa, 0.2);
    EXPECT_TRUE(static_cast<bool>(e.coeffs.b));
    ASSERT_TRUE(e.init2.has_value());
    EXPECT_EQ(e.init2->center.y()[0], -2.0);
    EXPECT_EQ(e.config_hash, hex64(kv.hash()));
}

TEST(ExperimentConfig, ParseAtoms)
{
    const auto atoms = parse_atoms("[(0,0,1.0), (1, -1, 0.5)]", 2);
    ASSERT_EQ(atoms.size(), 2u);
    EXPECT_EQ(atoms[1].location, (std::vector<double>{1.0, -1.0}));
    EXPECT_THROW(parse_atoms("[(0,1.0)]", 2), ValidationError);
    const auto one = parse_atoms("[(0,1.0), (2,0.5)]", 1);
    ASSERT_EQ(one.size(), 2u);
    EXPECT_EQ(one[1].location, std::vector<double>{2.0});
    EXPECT_EQ(one[1].weight, 0.5);
}
