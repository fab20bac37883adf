#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "fakes.hpp"
#include "solid/cli.hpp"
#include "solid/manifest.hpp"
#include "solid/seed.hpp"
#include "solid/serialize.hpp"
#include "solid/taxonomy.hpp"

using namespace solid;
using solid::testing::make_dialog;
using solid::testing::TempDir;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

const std::vector<std::string> kSmall = {"--entity-types", "3", "--names-per-letter", "3", "--log-level", "error"};

std::vector<std::string> with_small(std::vector<std::string> args) {
    args.insert(args.end(), kSmall.begin(), kSmall.end());
    return args;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        std::string body = read_text_file(e.path());
        if (e.path().string().ends_with(".manifest.json")) {
            Json j = Json::parse(body);
            j.erase("wall_time_s");
            body = j.dump();
        }
        files[e.path().filename().string()] = body;
    }
    return files;
}

void write_human(const std::filesystem::path& p) {
    std::vector<Dialog> human;
    for (int i = 0; i < 6; ++i) {
        human.push_back(make_dialog("h" + std::to_string(i), {{"What is relativity?", IntentSet{IntentCode::OQ}},
                                                              {"It relates space and time.", IntentSet{IntentCode::PA}}}));
    }
    write_dialogs_jsonl(p, human);
}

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"stats"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"seed", "--out", "x", "--backend", "carrier-pigeon"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST(Cli, NoApiKeyFlag) {
    const CliRun r = run({"seed", "--out", "x", "--api-key", "secret"});
    EXPECT_EQ(r.code, cli::kExitUsage);
}

TEST(Cli, StatsPrintsJson) {
    TempDir dir;
    write_dialogs_jsonl(dir / "d.jsonl", {make_dialog("d", {{"one two three", IntentSet{IntentCode::OQ}},
                                                            {"a b c d e", IntentSet{IntentCode::PA}}})});
    const CliRun r = run({"stats", "--in", (dir / "d.jsonl").string()});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["n_dialogs"], 1);
    EXPECT_EQ(j["avg_dialog_tokens"], 8.0);
}

TEST(Cli, RuntimeFailureExitsTwo) {
    TempDir dir;
    write_text_file(dir / "bad.jsonl", "{not json\n");
    const CliRun r = run({"stats", "--in", (dir / "bad.jsonl").string()});
    EXPECT_EQ(r.code, cli::kExitFailure);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, StageByStageFlow) {
    TempDir dir;
    const auto p = [&](const char* n) { return (dir / n).string(); };
    ASSERT_EQ(run(with_small({"seed", "--budget", "6", "--out", p("seeds.jsonl")})).code, 0);
    EXPECT_EQ(read_seeds_jsonl(p("seeds.jsonl")).size(), 6u);
    const Json sm = Json::parse(read_text_file(p("seeds.jsonl.manifest.json")));
    EXPECT_EQ(sm["command"], "seed");
    EXPECT_EQ(sm["counts"]["seeds"], 6);
    EXPECT_EQ(sm["outputs"][0]["digest"], file_digest(p("seeds.jsonl")));

    const std::vector<std::string> quiet = {"--log-level", "error"};
    auto q = [&](std::vector<std::string> a) {
        a.insert(a.end(), quiet.begin(), quiet.end());
        return run(a);
    };
    ASSERT_EQ(q({"generate", "--seeds", p("seeds.jsonl"), "--out", p("chosen.jsonl"), "--instruction-cache",
                 p("cache.json")})
                  .code,
              0);
    EXPECT_TRUE(std::filesystem::exists(p("cache.json")));
    ASSERT_EQ(q({"generate", "--seeds", p("seeds.jsonl"), "--out", p("rejected.jsonl"), "--mode", "singlepass"}).code,
              0);
    ASSERT_EQ(q({"build-dpo", "--chosen", p("chosen.jsonl"), "--rejected", p("rejected.jsonl"), "--seeds",
                 p("seeds.jsonl"), "--out", p("pairs.jsonl")})
                  .code,
              0);
    const Json pm = Json::parse(read_text_file(p("pairs.jsonl.manifest.json")));
    EXPECT_GT(pm["counts"]["pairs"].get<int>(), 0);

    write_human(p("human.jsonl"));
    ASSERT_EQ(q({"sample", "--strategy", "bm25", "--human", p("human.jsonl"), "--synthetic", p("chosen.jsonl"),
                 "--out", p("s.jsonl"), "--k", "2"})
                  .code,
              0);
    const Json sam = Json::parse(read_text_file(p("s.jsonl.manifest.json")));
    EXPECT_EQ(sam["counts"]["pre_dedup"], 12);
    EXPECT_EQ(q({"sample", "--strategy", "bm25", "--synthetic", p("chosen.jsonl"), "--out", p("s2.jsonl")}).code,
              cli::kExitFailure);
    ASSERT_EQ(q({"sample", "--strategy", "int-bal", "--human", p("human.jsonl"), "--synthetic", p("chosen.jsonl"),
                 "--out", p("ib.jsonl")})
                  .code,
              0);

    ASSERT_EQ(q({"train-ip", "--train", p("chosen.jsonl"), "--model-out", p("model.json"), "--epochs", "5"}).code, 0);
    const CliRun ev = q({"eval-ip", "--model", p("model.json"), "--test", p("chosen.jsonl"), "--report", p("r.json"),
                      "--baseline-train", p("chosen.jsonl")});
    ASSERT_EQ(ev.code, 0) << ev.err;
    const Json report = Json::parse(read_text_file(p("r.json")));
    EXPECT_EQ(report["per_label"].size(), 12u);
    EXPECT_EQ(Json::parse(ev.out), report);
    EXPECT_TRUE(Json::parse(read_text_file(p("r.json.manifest.json")))["counts"].contains("baseline_f1_micro"));
}

TEST(Cli, ConfigFileWithFlagOverride) {
    TempDir dir;
    write_text_file(dir / "run.conf", "log-level=error\n[seed]\nbudget=3\nentity-types=2\nnames-per-letter=2\n");
    ASSERT_EQ(run({"--config", (dir / "run.conf").string(), "seed", "--out", (dir / "a.jsonl").string()}).code, 0);
    EXPECT_EQ(read_seeds_jsonl(dir / "a.jsonl").size(), 3u);
    ASSERT_EQ(run({"--config", (dir / "run.conf").string(), "seed", "--out", (dir / "b.jsonl").string(), "--budget",
                   "4"})
                  .code,
              0);
    EXPECT_EQ(read_seeds_jsonl(dir / "b.jsonl").size(), 4u);
}

TEST(Cli, FilterEntitiesPartition) {
    TempDir dir;
    const auto p = [&](const char* n) { return (dir / n).string(); };
    ASSERT_EQ(run(with_small({"seed", "--budget", "5", "--out", p("seeds.jsonl")})).code, 0);
    const auto seeds = read_seeds_jsonl(p("seeds.jsonl"));
    Json fixture = Json::object();
    fixture[seeds[0].entity_name] = true;
    write_text_file(p("wiki.json"), fixture.dump());
    ASSERT_EQ(run({"filter-entities", "--seeds", p("seeds.jsonl"), "--out", p("f.jsonl"), "--fixture", p("wiki.json"),
                   "--partition"})
                  .code,
              0);
    const auto h = read_seeds_jsonl(p("f.hallucinated.jsonl"));
    const auto g = read_seeds_jsonl(p("f.grounded.jsonl"));
    EXPECT_EQ(h.size() + g.size(), 5u);
    EXPECT_GE(g.size(), 1u);
    EXPECT_EQ(run({"filter-entities", "--seeds", p("seeds.jsonl"), "--out", p("f2.jsonl")}).code, cli::kExitFailure);
}

TEST(Cli, PipelineIsReproducible) {
    TempDir dir;
    write_human(dir / "human.jsonl");
    const std::vector<std::string> args =
        with_small({"pipeline", "--backend", "mock", "--rng-seed", "1", "--budget", "8", "--min-count", "3",
                    "--out-dir", (dir / "run").string(), "--human", (dir / "human.jsonl").string()});
    const CliRun first = run(args);
    ASSERT_EQ(first.code, 0) << first.err;
    const auto a = snapshot(dir / "run");
    const CliRun second = run(args);
    ASSERT_EQ(second.code, 0);
    EXPECT_EQ(first.out, second.out);
    EXPECT_EQ(a, snapshot(dir / "run"));
    for (const char* f : {"seeds.jsonl", "chosen.jsonl", "rejected.jsonl", "pairs.jsonl", "sample.jsonl", "stats.json",
                          "pipeline.manifest.json"}) {
        EXPECT_TRUE(a.count(f)) << f;
    }
}
