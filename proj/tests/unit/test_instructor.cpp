#include <gtest/gtest.h>

#include "fakes.hpp"
#include "solid/errors.hpp"
#include "solid/instructor.hpp"
#include "solid/mock_backend.hpp"
#include "solid/parallel.hpp"
#include "solid/prompts.hpp"

using namespace solid;
using solid::testing::ScriptedBackend;

namespace {

struct Fixture {
    std::shared_ptr<MockBackend> mock = std::make_shared<MockBackend>();
    Client client{mock};
};

const IntentSet kPaGg{IntentCode::PA, IntentCode::GG};
const IntentSet kPaIr{IntentCode::PA, IntentCode::IR};

}  // namespace

TEST(LookupInstruction, TableRows) {
    EXPECT_EQ(lookup_instruction(Actor::User, IntentCode::FD), "Reply with more details in conversation style.");
    EXPECT_EQ(lookup_instruction(Actor::Agent, IntentCode::FD), "Reply with further details in conversation style.");
    EXPECT_TRUE(lookup_instruction(Actor::User, IntentCode::RQ)
                    .starts_with("Now you are talking from the point of view of a third participant"));
}

TEST(LookupInstruction, TotalOverAllPairs) {
    int n = 0;
    for (Actor a : {Actor::User, Actor::Agent}) {
        for (IntentCode c : kAllIntents) {
            EXPECT_FALSE(lookup_instruction(a, c).empty());
            ++n;
        }
    }
    EXPECT_EQ(n, 24);
}

TEST(MergeInstructions, MockMergesBothSources) {
    Fixture f;
    const std::string merged = merge_instructions(f.client, Actor::User, kPaGg, {});
    EXPECT_NE(merged.find(lookup_instruction(Actor::User, IntentCode::PA)), std::string::npos);
    EXPECT_NE(merged.find(lookup_instruction(Actor::User, IntentCode::GG)), std::string::npos);
    EXPECT_EQ(merged, merge_instructions(f.client, Actor::User, kPaGg, {}));
    EXPECT_EQ(prompts::classify(prompts::merge_instructions(Actor::User, {"a", "b"})),
              prompts::Kind::MergeInstructions);
}

TEST(MergeInstructions, Preconditions) {
    Fixture f;
    EXPECT_THROW(merge_instructions(f.client, Actor::User, IntentSet{IntentCode::PA}, {}), PreconditionError);
    auto blank = std::make_shared<ScriptedBackend>(std::vector<std::string>{" \n "});
    Client c(blank);
    EXPECT_THROW(merge_instructions(c, Actor::Agent, kPaGg, {}), DegenerateOutput);
}

TEST(Instructor, SingletonUsesTableAndLeavesCacheUntouched) {
    Fixture f;
    Instructor ins(f.client, {});
    EXPECT_EQ(ins.instruction_for(Actor::Agent, IntentSet{IntentCode::PA}),
              lookup_instruction(Actor::Agent, IntentCode::PA));
    EXPECT_EQ(ins.cache().size(), 0u);
    EXPECT_EQ(f.mock->complete_calls(), 0u);
}

TEST(Instructor, CanonicalSetKeyServesSecondCallFromCache) {
    Fixture f;
    Instructor ins(f.client, {});
    const std::string a = ins.instruction_for(Actor::User, IntentSet{IntentCode::PA, IntentCode::IR});
    const std::string b = ins.instruction_for(Actor::User, IntentSet{IntentCode::IR, IntentCode::PA});
    EXPECT_EQ(a, b);
    EXPECT_EQ(f.mock->complete_calls(), 1u);
    EXPECT_TRUE(ins.cache().contains(Actor::User, kPaIr));
    EXPECT_FALSE(ins.cache().contains(Actor::Agent, kPaIr));
}

TEST(Instructor, NoCacheCallsEveryTime) {
    Fixture f;
    Instructor ins(f.client, {}, InstructorOptions{false, false});
    for (int i = 0; i < 4; ++i) ins.instruction_for(Actor::User, kPaIr);
    EXPECT_EQ(f.mock->complete_calls(), 4u);
}

TEST(Instructor, RuleBasedMergeNeedsNoBackend) {
    Fixture f;
    Instructor ins(f.client, {}, InstructorOptions{true, true});
    EXPECT_EQ(ins.instruction_for(Actor::User, kPaIr),
              lookup_instruction(Actor::User, IntentCode::IR) + " and " + lookup_instruction(Actor::User, IntentCode::PA));
    EXPECT_EQ(f.mock->complete_calls(), 0u);
}

TEST(InstructionCache, ConcurrentMissesShareOneCall) {
    MockBackend::Options o;
    o.latency = std::chrono::microseconds(20000);
    auto mock = std::make_shared<MockBackend>(o);
    Client client(mock, {}, 16);
    Instructor ins(client, {});
    std::vector<std::string> results(16);
    parallel_for(16, 16, [&](std::size_t i) { results[i] = ins.instruction_for(Actor::Agent, kPaGg); });
    EXPECT_EQ(mock->complete_calls(), 1u);
    for (const auto& r : results) EXPECT_EQ(r, results[0]);
}

TEST(InstructionCache, FailureIsNotMemoised) {
    auto flaky = std::make_shared<solid::testing::FlakyBackend>(1, [] { throw BadRequest("no"); });
    Client c(flaky);
    InstructionCache cache;
    EXPECT_THROW(cache.get_or_merge(c, Actor::User, kPaIr, {}), BadRequest);
    EXPECT_EQ(cache.size(), 0u);
    EXPECT_EQ(cache.get_or_merge(c, Actor::User, kPaIr, {}), "Recovered.");
    EXPECT_EQ(cache.size(), 1u);
}

TEST(InstructionCache, SidecarRoundTrip) {
    Fixture f;
    solid::testing::TempDir dir;
    InstructionCache cache;
    cache.get_or_merge(f.client, Actor::User, kPaIr, {});
    cache.get_or_merge(f.client, Actor::Agent, kPaGg, {});
    cache.save(dir / "cache.jsonl");

    InstructionCache loaded;
    loaded.load(dir / "cache.jsonl");
    EXPECT_EQ(loaded.size(), 2u);
    f.mock->reset_counters();
    EXPECT_EQ(loaded.get_or_merge(f.client, Actor::User, kPaIr, {}), cache.get_or_merge(f.client, Actor::User, kPaIr, {}));
    EXPECT_EQ(f.mock->complete_calls(), 0u);

    loaded.load(dir / "missing.jsonl");
    EXPECT_EQ(loaded.size(), 2u);
}
