#include <gtest/gtest.h>

#include "fakes.hpp"
#include "solid/bundled.hpp"
#include "solid/errors.hpp"
#include "solid/generator.hpp"
#include "solid/mock_backend.hpp"
#include "solid/seeder.hpp"
#include "solid/text.hpp"

using namespace solid;
using solid::testing::ScriptedBackend;

namespace {

Seed einstein(std::string_view seq = "OQ; PA; FD; PA; PF") {
    Seed s;
    s.id = "seed-einstein";
    s.entity_type = "Person";
    s.attributes = {"Occupation"};
    s.entity_name = "Albert Einstein";
    s.background_document = "Albert Einstein was a theoretical physicist.";
    s.conversation_starter = "Can you delve into the theory of relativity?";
    s.intent_sequence = parse_sequence(seq);
    return s;
}

std::string random_string(Rng& rng) {
    static const std::vector<std::string> pieces = {
        "a", "b", " ", "  ", "\n", "\n\n", ".", "!", "?", "\"", "'", ")", "]", "}", "user:", "Agent:",
        "USER :", "agent :", "User", ":", "\t", "word", "Hi", "é", "\r\n", "x.y", "(", "-",
    };
    std::string s;
    const std::size_t n = rng.below(16);
    for (std::size_t i = 0; i < n; ++i) s += pieces[rng.below(pieces.size())];
    return s;
}

}  // namespace

TEST(PostProcess, Examples) {
    EXPECT_EQ(post_process("Hello there. How ar"), "Hello there.");
    EXPECT_EQ(post_process("Agent: Sure!\n\nHere it is."), "Sure!\nHere it is.");
    EXPECT_EQ(post_process("Hi!"), "Hi!");
}

TEST(PostProcess, KeywordsAndClosers) {
    EXPECT_EQ(post_process("user: agent:  What now?"), "What now?");
    EXPECT_EQ(post_process("USER : Yes."), "Yes.");
    EXPECT_EQ(post_process("He said \"go.\" and"), "He said \"go.\"");
    EXPECT_EQ(post_process("(See above.) More"), "(See above.)");
    EXPECT_EQ(post_process("Username: x."), "Username: x.");
}

TEST(PostProcess, Degenerate) {
    EXPECT_THROW(post_process("no punctuation"), DegenerateOutput);
    EXPECT_THROW(post_process(""), DegenerateOutput);
    EXPECT_THROW(post_process("user:"), DegenerateOutput);
}

TEST(PostProcess, IdempotentProperty) {
    Rng rng(2718);
    int accepted = 0;
    for (int i = 0; i < 20000; ++i) {
        const std::string s = random_string(rng);
        std::string once;
        try {
            once = post_process(s);
        } catch (const DegenerateOutput&) {
            continue;
        }
        ++accepted;
        ASSERT_EQ(post_process(once), once) << "input: '" << s << "'";
        ASSERT_EQ(text::trim(once), once);
        ASSERT_FALSE(text::istarts_with(once, "user:"));
        ASSERT_FALSE(text::istarts_with(once, "agent:"));
    }
    EXPECT_GT(accepted, 1000);
}

TEST(BuildTurnPrompt, EmptyHistoryAndPurity) {
    GenerationContext ctx = context_for(einstein());
    const auto a = build_turn_prompt(ctx, "Reply with relevant information.");
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].role, ChatMessage::Role::System);
    EXPECT_EQ(a[0].content, prompts::kGlobalInstruction);
    EXPECT_NE(a[1].content.find("Conversation history:\nInstruction: Reply with relevant information."),
              std::string::npos);
    EXPECT_NE(a[1].content.find("Next speaker: User"), std::string::npos);
    EXPECT_EQ(a, build_turn_prompt(ctx, "Reply with relevant information."));
    EXPECT_THROW(build_turn_prompt(ctx, "  "), PreconditionError);
}

TEST(BuildTurnPrompt, HistoryInOrder) {
    GenerationContext ctx = context_for(einstein());
    ctx.history = {{Actor::User, "First?", IntentSet{IntentCode::OQ}, {}},
                   {Actor::Agent, "Second.", IntentSet{IntentCode::PA}, {}},
                   {Actor::User, "Third.", IntentSet{IntentCode::PF}, {}}};
    const std::string u = build_turn_prompt(ctx, "Go.", IntentSet{IntentCode::PA, IntentCode::IR})[1].content;
    const auto p1 = u.find("User: First?\n"), p2 = u.find("Agent: Second.\n"), p3 = u.find("User: Third.\n");
    ASSERT_NE(p1, std::string::npos);
    ASSERT_NE(p2, std::string::npos);
    ASSERT_NE(p3, std::string::npos);
    EXPECT_LT(p1, p2);
    EXPECT_LT(p2, p3);
    EXPECT_NE(u.find("Next speaker: Agent"), std::string::npos);
    EXPECT_NE(u.find("<<INTENT:ir>> <<INTENT:pa>>"), std::string::npos);
    EXPECT_NE(u.find("Entity: Albert Einstein"), std::string::npos);
    EXPECT_EQ(prompts::classify(u), prompts::Kind::Turn);
}

TEST(GenerateDialog, FiveElementSequenceGivesFiveUtterances) {
    Client c(std::make_shared<MockBackend>());
    Instructor ins(c, {});
    GeneratorOptions o;
    o.intent_markers = true;
    const Dialog d = generate_dialog(c, ins, einstein(), o);
    ASSERT_EQ(d.utterances.size(), 5u);
    EXPECT_EQ(sequence_of(d), einstein().intent_sequence);
    EXPECT_EQ(d.utterances[0].text, "Can you delve into the theory of relativity?");
    EXPECT_EQ(d.seed_id, "seed-einstein");
    EXPECT_NO_THROW(validate_dialog(d));
    for (std::size_t k = 1; k < 5; ++k) {
        for (IntentCode code : d.utterances[k].intents.codes()) {
            EXPECT_NE(d.utterances[k].text.find("MARK_" + text::to_lower(code_of(code))), std::string::npos);
        }
    }
}

TEST(GenerateDialog, BitIdenticalAcrossRuns) {
    auto run = [] {
        Client c(std::make_shared<MockBackend>());
        Instructor ins(c, {});
        return generate_dialog(c, ins, einstein("OQ; PA+IR; FD; PA+GG; PF"));
    };
    EXPECT_EQ(run(), run());
}

TEST(GenerateDialog, RetriesDegenerateTurns) {
    auto b = std::make_shared<ScriptedBackend>(std::vector<std::string>{"no stop", "still none", "Fine."});
    Client c(b);
    Instructor ins(c, {});
    GeneratorOptions o;
    o.turn_attempts = 3;
    const Dialog d = generate_dialog(c, ins, einstein("OQ; PA"), o);
    EXPECT_EQ(d.utterances[1].text, "Fine.");
    EXPECT_EQ(b->calls(), 3u);
    // Each attempt carries its own request seed.
    const auto params = b->params();
    EXPECT_NE(params[0].request_seed, params[1].request_seed);
}

TEST(GenerateDialog, TurnFailureReportsTurn) {
    Client c(std::make_shared<ScriptedBackend>(std::vector<std::string>{}, "never punctuated"));
    Instructor ins(c, {});
    try {
        generate_dialog(c, ins, einstein("OQ; PA"));
        FAIL();
    } catch (const TurnFailure& e) {
        EXPECT_EQ(e.turn(), 1u);
    }
    Seed bad = einstein("OQ; PA");
    bad.conversation_starter = "no punctuation";
    try {
        generate_dialog(c, ins, bad);
        FAIL();
    } catch (const TurnFailure& e) {
        EXPECT_EQ(e.turn(), 0u);
    }
}

TEST(GenerateDialog, TransportErrorAbortsImmediately) {
    auto flaky = std::make_shared<solid::testing::FlakyBackend>(100, [] { throw BadRequest("bad"); });
    Client c(flaky);
    Instructor ins(c, {}, InstructorOptions{true, true});
    EXPECT_THROW(generate_dialog(c, ins, einstein("OQ; PA; FD")), TurnFailure);
    EXPECT_EQ(flaky->calls(), 1);
}

TEST(ParseSinglePass, StrictBlocks) {
    const auto seq = parse_sequence("OQ; PA+IR; PF");
    const auto p = parse_single_pass(
        "Utterance 1:\nText: Hi there?\nIntent: original question\n\n"
        "Utterance 2:\nText: Agent: Try it.\nIntent: PA, IR.\n\n"
        "Utterance 3:\nText: Thanks.\nIntent: ???\n",
        seq);
    ASSERT_EQ(p.utterances.size(), 3u);
    EXPECT_EQ(p.utterances[0].intents, IntentSet{IntentCode::OQ});
    EXPECT_EQ(p.utterances[1].text, "Try it.");
    EXPECT_EQ(p.utterances[1].intents, (IntentSet{IntentCode::PA, IntentCode::IR}));
    EXPECT_EQ(p.utterances[2].intents, IntentSet{IntentCode::PF});  // unreadable: k-th element
    EXPECT_EQ(p.utterances[1].actor, Actor::Agent);
    EXPECT_FALSE(p.truncated);
}

TEST(ParseSinglePass, LenientParagraphsAndFallbacks) {
    const auto seq = parse_sequence("OQ");
    const auto p = parse_single_pass("User: Where is it?\n\nAgent: Over there.\n\n---\n", seq);
    ASSERT_EQ(p.utterances.size(), 2u);
    EXPECT_EQ(p.utterances[0].text, "Where is it?");
    EXPECT_EQ(p.utterances[0].intents, IntentSet{IntentCode::OQ});
    EXPECT_EQ(p.utterances[1].intents, IntentSet{IntentCode::O});
    EXPECT_THROW(parse_single_pass("!!! ??? ...", seq), Unparseable);
    EXPECT_THROW(parse_single_pass("", seq), Unparseable);
}

TEST(ParseSinglePass, TruncatesPastTwenty) {
    std::string reply;
    for (int k = 1; k <= 23; ++k) reply += "Utterance " + std::to_string(k) + ":\nText: Line.\nIntent: JK\n\n";
    const auto p = parse_single_pass(reply, parse_sequence("JK"));
    EXPECT_EQ(p.utterances.size(), 20u);
    EXPECT_TRUE(p.truncated);
}

TEST(GenerateSinglePass, ScriptedMatchAndMismatch) {
    auto three = std::make_shared<ScriptedBackend>(std::vector<std::string>{
        "Utterance 1:\nText: A?\nIntent: OQ\n\nUtterance 2:\nText: B.\nIntent: PA\n\nUtterance 3:\nText: C.\nIntent: PF"});
    Client c3(three);
    const Dialog d3 = generate_dialog_single_pass(c3, einstein("OQ; PA; PF"));
    EXPECT_EQ(d3.utterances.size(), 3u);
    EXPECT_EQ(d3.length_mismatch, false);
    EXPECT_EQ(d3.id, "seed-einstein/singlepass");
    EXPECT_GE(three->params()[0].max_tokens, 512 * 3);

    auto two = std::make_shared<ScriptedBackend>(
        std::vector<std::string>{"Utterance 1:\nText: A?\nIntent: OQ\n\nUtterance 2:\nText: B.\nIntent: PA"});
    Client c2(two);
    const Dialog d2 = generate_dialog_single_pass(c2, einstein());
    EXPECT_EQ(d2.utterances.size(), 2u);
    EXPECT_EQ(d2.length_mismatch, true);

    Client garbage(std::make_shared<ScriptedBackend>(std::vector<std::string>{"#### ----"}));
    EXPECT_THROW(generate_dialog_single_pass(garbage, einstein()), Unparseable);
}

TEST(GenerateCorpus, SeedOrderAndFailures) {
    auto backend = std::make_shared<MockBackend>();
    Client c(backend, {}, 4);
    Instructor ins(c, {});
    SeederOptions so;
    so.entity_types = 5;
    so.names_per_letter = 5;
    so.attributes_per_type = 3;
    so.intent_markers = true;
    const auto corpus = parse_canonical_corpus(bundled_sequence_corpus(), "b").corpus;
    std::vector<Seed> seeds = build_seeds(c, corpus, 12, 4, so).seeds;
    seeds[3].conversation_starter = "unpunctuated";
    GeneratorOptions go;
    go.intent_markers = true;
    const DialogBatch serial = generate_corpus(c, ins, seeds, GenerationMode::Turnwise, go, 1);
    const DialogBatch parallel = generate_corpus(c, ins, seeds, GenerationMode::Turnwise, go, 4);
    EXPECT_EQ(serial.dialogs, parallel.dialogs);
    ASSERT_EQ(serial.failures.size(), 1u);
    EXPECT_EQ(serial.failures[0].seed_id, seeds[3].id);
    EXPECT_EQ(serial.dialogs.size(), 11u);

    const DialogBatch sp = generate_corpus(c, ins, seeds, GenerationMode::SinglePass, go, 2);
    EXPECT_EQ(sp.dialogs.size(), 12u);
    for (const Dialog& d : sp.dialogs) EXPECT_TRUE(d.length_mismatch.has_value());
}
