#include <gtest/gtest.h>

#include <cmath>

#include "fakes.hpp"
#include "oracles.hpp"
#include "solid/errors.hpp"
#include "solid/ipeval.hpp"
#include "solid/mock_backend.hpp"

using namespace solid;
using solid::testing::make_dialog;

namespace {

const IntentSet OQ{IntentCode::OQ}, PA{IntentCode::PA}, IR{IntentCode::IR}, GG{IntentCode::GG}, PF{IntentCode::PF};

// Two intents told apart by disjoint vocabularies.
std::vector<Dialog> separable_fixture() {
    std::vector<Dialog> out;
    const std::vector<std::string> q = {"how", "why", "where", "what", "when"};
    const std::vector<std::string> a = {"because", "therefore", "indeed", "thus", "hence"};
    for (int i = 0; i < 40; ++i) {
        const std::string qt = q[i % 5] + " " + q[(i / 5) % 5] + " q" + std::to_string(i % 7) + "?";
        const std::string at = a[i % 5] + " " + a[(i / 5) % 5] + " a" + std::to_string(i % 3) + ".";
        out.push_back(make_dialog("d" + std::to_string(i), {{qt, OQ}, {at, PA}}));
    }
    return out;
}

std::vector<SparseVector> random_sparse(Rng& rng, std::size_t n, std::size_t dim) {
    std::vector<SparseVector> xs;
    for (std::size_t i = 0; i < n; ++i) {
        SparseVector x;
        for (std::uint32_t j = 0; j < dim; ++j) {
            if (rng.below(3) == 0) {
                x.index.push_back(j);
                x.value.push_back(rng.uniform() * 2 - 1);
            }
        }
        xs.push_back(std::move(x));
    }
    return xs;
}

}  // namespace

TEST(Evaluate, HandEnumeratedFixture) {
    const MetricsReport r = evaluate({OQ, IntentSet{IntentCode::PA, IntentCode::IR}, GG}, {OQ, PA, PF});
    EXPECT_NEAR(r.precision, 2.0 / 3.0, 1e-9);
    EXPECT_NEAR(r.f1_micro, 4.0 / 7.0, 1e-9);
    const auto c = oracle::enumerate({OQ, IntentSet{IntentCode::PA, IntentCode::IR}, GG}, {OQ, PA, PF});
    EXPECT_EQ(c.tp, 2u);
    EXPECT_EQ(c.fp, 1u);
    EXPECT_EQ(c.fn, 2u);
    EXPECT_EQ(r.n_samples, 3u);
    EXPECT_EQ(r.per_label[index_of(IntentCode::IR)].support, 1u);
}

TEST(Evaluate, PerfectAndDisjoint) {
    const std::vector<IntentSet> gold = {OQ, PA, IntentSet{IntentCode::GG, IntentCode::PF}};
    const MetricsReport p = evaluate(gold, gold);
    EXPECT_EQ(p.precision, 1.0);
    EXPECT_EQ(p.f1_micro, 1.0);
    const MetricsReport d = evaluate(gold, {PA, OQ, IR});
    EXPECT_EQ(d.precision, 0.0);
    EXPECT_EQ(d.f1_micro, 0.0);
    EXPECT_THROW(evaluate(gold, {PA}), LengthMismatch);
}

TEST(Evaluate, MacroIsMeanOfTwelveAndBoundsProperty) {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<IntentSet> gold, pred;
        const std::size_t n = 1 + rng.below(30);
        for (std::size_t i = 0; i < n; ++i) {
            gold.push_back(solid::testing::random_intent_set(rng));
            pred.push_back(solid::testing::random_intent_set(rng));
        }
        const MetricsReport r = evaluate(gold, pred);
        double sum = 0;
        for (const auto& l : r.per_label) {
            sum += l.f1;
            ASSERT_GE(l.f1, 0.0);
            ASSERT_LE(l.f1, 1.0);
        }
        ASSERT_EQ(r.f1_macro, sum / 12.0);
        const auto o = oracle::enumerate(gold, pred);
        ASSERT_NEAR(r.precision, o.precision, 1e-12);
        ASSERT_NEAR(r.f1_micro, o.f1_micro, 1e-12);
        for (double v : {r.precision, r.f1_micro, r.f1_macro}) {
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 1.0);
        }
        // Sample order does not change micro F1.
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        std::vector<IntentSet> g2, p2;
        for (std::size_t i : perm) {
            g2.push_back(gold[i]);
            p2.push_back(pred[i]);
        }
        ASSERT_NEAR(evaluate(g2, p2).f1_micro, r.f1_micro, 1e-15);
    }
}

TEST(Evaluate, AbsentLabelCountsAsZero) {
    const MetricsReport r = evaluate({OQ}, {OQ});
    EXPECT_EQ(r.per_label[index_of(IntentCode::OQ)].f1, 1.0);
    EXPECT_NEAR(r.f1_macro, 1.0 / 12.0, 1e-15);
}

TEST(ReportJson, SchemaAndRoundTrip) {
    const MetricsReport r = evaluate({OQ, PA}, {OQ, IR});
    const Json j = report_to_json(r);
    for (const char* k : {"precision", "f1_micro", "f1_macro", "n_samples", "per_label"}) EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j["per_label"].size(), 12u);
    for (const auto& [code, l] : j["per_label"].items()) {
        for (const char* k : {"precision", "recall", "f1", "support"}) EXPECT_TRUE(l.contains(k));
    }
    const MetricsReport back = report_from_json(Json::parse(j.dump()));
    EXPECT_EQ(back.f1_micro, r.f1_micro);
    EXPECT_EQ(back.per_label[index_of(IntentCode::PA)].support, 1u);
    EXPECT_THROW(report_from_json(Json::parse("{}")), ParseError);
}

TEST(Features, TermsAndNormalisation) {
    EXPECT_EQ(feature_terms("Was it?", "Yes it is"),
              (std::vector<std::string>{"u:yes", "u:yes_it", "u:it", "u:it_is", "u:is", "p:was", "p:it"}));
    const FeatureSpace fs = FeatureSpace::fit({{"", "a b", PA}, {"a b", "a c", OQ}});
    const SparseVector x = fs.transform("", "a b zzz");
    double norm = 0;
    for (double v : x.value) norm += v * v;
    EXPECT_NEAR(norm, 1.0, 1e-12);
    EXPECT_TRUE(std::is_sorted(x.index.begin(), x.index.end()));
    EXPECT_EQ(fs.transform("", "zzz").size(), 0u);
    // Smoothed idf of a term in both documents: ln(3/3) + 1.
    const auto& terms = fs.terms();
    const auto it = std::find(terms.begin(), terms.end(), "u:a");
    ASSERT_NE(it, terms.end());
    EXPECT_DOUBLE_EQ(fs.idf()[static_cast<std::size_t>(it - terms.begin())], 1.0);
}

TEST(HeadObjective, GradientMatchesCentralDifferences) {
    Rng rng(50);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = 2 + rng.below(8), n = 1 + rng.below(12);
        const auto x = random_sparse(rng, n, dim);
        std::vector<std::uint8_t> y(n);
        for (auto& v : y) v = static_cast<std::uint8_t>(rng.below(2));
        std::vector<double> w(dim);
        for (double& v : w) v = rng.uniform() * 4 - 2;
        const double b = rng.uniform() * 2 - 1, l2 = rng.uniform() * 0.1;
        std::vector<double> g;
        double gb = 0;
        head_objective(x, y, w, b, l2, &g, &gb);
        const double h = 1e-6;
        for (std::size_t j = 0; j < dim; ++j) {
            auto wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            const double num = (head_objective(x, y, wp, b, l2) - head_objective(x, y, wm, b, l2)) / (2 * h);
            ASSERT_LE(std::abs(num - g[j]) / std::max(1.0, std::abs(num)), 1e-5);
        }
        const double numb = (head_objective(x, y, w, b + h, l2) - head_objective(x, y, w, b - h, l2)) / (2 * h);
        ASSERT_LE(std::abs(numb - gb) / std::max(1.0, std::abs(numb)), 1e-5);
    }
}

TEST(HeadObjective, Errors) {
    EXPECT_THROW(head_objective({}, {}, {}, 0, 0), EmptyTraining);
    EXPECT_THROW(head_objective({SparseVector{}}, {}, {}, 0, 0), LengthMismatch);
}

TEST(TrainIp, SeparableFixtureReachesPerfectTrainingF1) {
    const auto train = separable_fixture();
    // Certify separability of the OQ head on the fitted features.
    const auto data = utterances_of(train);
    const FeatureSpace fs = FeatureSpace::fit(data);
    std::vector<std::vector<double>> dense;
    std::vector<int> labels;
    for (const auto& u : data) {
        std::vector<double> v(fs.dimension(), 0.0);
        const SparseVector s = fs.transform(u.previous, u.text);
        for (std::size_t i = 0; i < s.size(); ++i) v[s.index[i]] = s.value[i];
        dense.push_back(std::move(v));
        labels.push_back(u.intents.contains(IntentCode::OQ));
    }
    ASSERT_TRUE(oracle::perceptron_separates(dense, labels));

    const IPModel m = train_ip(train);
    EXPECT_EQ(evaluate_model(m, train).f1_micro, 1.0);
    ASSERT_GE(m.loss_history.size(), 11u);
    EXPECT_LT(m.loss_history[10], m.loss_history[0]);
    EXPECT_EQ(m.loss_history.size(), 31u);
}

TEST(TrainIp, LossNonIncreasingWithinTolerance) {
    const IPModel m = train_ip(separable_fixture());
    for (std::size_t e = 1; e < m.loss_history.size(); ++e) {
        EXPECT_LE(m.loss_history[e], m.loss_history[e - 1] + 1e-6) << e;
    }
}

TEST(TrainIp, ZeroEpochsGivesPriorOnlyPredictions) {
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto train = separable_fixture();
    std::vector<Dialog> skewed = train;
    skewed.push_back(make_dialog("x", {{"extra question?", OQ}}));
    const IPModel m = train_ip(skewed, cfg);
    EXPECT_EQ(m.loss_history.size(), 1u);
    for (const auto& w : m.weights) {
        for (double v : w) EXPECT_EQ(v, 0.0);
    }
    // OQ is the most frequent label, so the prior-only model predicts it everywhere.
    EXPECT_EQ(predict_intents(m, "", "hence indeed."), OQ);
    EXPECT_EQ(predict_intents(m, "", "completely unseen words"), OQ);
}

TEST(TrainIp, DeterministicUnderFixedSeed) {
    const auto train = separable_fixture();
    const IPModel a = train_ip(train), b = train_ip(train);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.bias, b.bias);
    TrainConfig other;
    other.rng_seed = 2;
    EXPECT_NE(train_ip(train, other).weights, a.weights);
}

TEST(TrainIp, Preconditions) {
    EXPECT_THROW(train_ip(std::vector<Dialog>{}), EmptyTraining);
    TrainConfig bad;
    bad.threshold = 1.0;
    EXPECT_THROW(train_ip(separable_fixture(), bad), PreconditionError);
    bad = {};
    bad.batch_size = 0;
    EXPECT_THROW(train_ip(separable_fixture(), bad), PreconditionError);
}

TEST(PredictIntents, ThresholdAndFallback) {
    IPModel m = train_ip(separable_fixture());
    // Force every head: two above the threshold, the rest below.
    for (auto& w : m.weights) std::fill(w.begin(), w.end(), 0.0);
    m.bias.fill(-5.0);
    m.bias[index_of(IntentCode::PA)] = 3.0;
    m.bias[index_of(IntentCode::IR)] = 2.0;
    EXPECT_EQ(predict_intents(m, "", "anything"), (IntentSet{IntentCode::PA, IntentCode::IR}));
    m.bias.fill(-5.0);
    m.bias[index_of(IntentCode::GG)] = -1.0;
    EXPECT_EQ(predict_intents(m, "", "anything"), GG);
    const Dialog d = make_dialog("d", {{"a.", OQ}});
    EXPECT_THROW(predict_intents(m, d, 1), PreconditionError);
}

TEST(PredictIntents, NeverEmptyProperty) {
    const IPModel m = train_ip(separable_fixture());
    Rng rng(8);
    for (int i = 0; i < 500; ++i) {
        EXPECT_GE(predict_intents(m, solid::testing::random_words(rng, 0, 5), solid::testing::random_words(rng, 0, 8)).size(), 1u);
    }
}

TEST(ModelJson, SaveLoadPreservesPredictions) {
    solid::testing::TempDir dir;
    const auto train = separable_fixture();
    const IPModel m = train_ip(train);
    save_model(dir / "m.json", m);
    const IPModel back = load_model(dir / "m.json");
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_EQ(back.bias, m.bias);
    EXPECT_EQ(back.loss_history, m.loss_history);
    EXPECT_EQ(back.features.terms(), m.features.terms());
    EXPECT_EQ(evaluate_model(back, train).f1_micro, evaluate_model(m, train).f1_micro);
    write_text_file(dir / "bad.json", "{\"config\":{}}");
    EXPECT_THROW(load_model(dir / "bad.json"), ParseError);
}

TEST(MajoritySingleton, CountsUtterances) {
    const std::vector<Dialog> train = {make_dialog("a", {{"x.", PA}, {"y.", IntentSet{IntentCode::PA, IntentCode::IR}}}),
                                       make_dialog("b", {{"z.", IR}, {"w.", PA}})};
    EXPECT_EQ(majority_singleton(train), PA);
}

TEST(FewShot, ParsesRepliesLeniently) {
    EXPECT_EQ(parse_fewshot_reply("PA, IR"), (IntentSet{IntentCode::PA, IntentCode::IR}));
    EXPECT_EQ(parse_fewshot_reply("PA, IR."), (IntentSet{IntentCode::PA, IntentCode::IR}));
    EXPECT_EQ(parse_fewshot_reply("I think it is a potential answer (PA) really"), PA);
    EXPECT_EQ(parse_fewshot_reply("no idea whatsoever"), IntentSet{IntentCode::O});
    EXPECT_EQ(parse_fewshot_reply(""), IntentSet{IntentCode::O});
    EXPECT_EQ(parse_fewshot_reply("SPAM"), IntentSet{IntentCode::O});
}

TEST(FewShot, PredictsThroughBackend) {
    Client echo(std::make_shared<solid::testing::ScriptedBackend>(std::vector<std::string>{"PA, IR"}));
    const Dialog d = make_dialog("d", {{"Where?", OQ}, {"Here.", PA}});
    const std::vector<prompts::LabeledExample> shots = {{"", "Hello?", OQ}};
    EXPECT_EQ(fewshot_predict(echo, d, 1, shots), (IntentSet{IntentCode::PA, IntentCode::IR}));
    EXPECT_THROW(fewshot_predict(echo, d, 1, {}), PreconditionError);

    Client mock(std::make_shared<MockBackend>());
    const Dialog marked = make_dialog("m", {{"Where MARK_oq?", OQ}, {"Here MARK_pa MARK_gg.", PA}});
    EXPECT_EQ(fewshot_predict(mock, marked, 1, shots), (IntentSet{IntentCode::PA, IntentCode::GG}));
    EXPECT_EQ(fewshot_predict(mock, make_dialog("u", {{"plain?", OQ}}), 0, shots), IntentSet{IntentCode::O});
}

TEST(CorpusStats, HandCount) {
    const CorpusStats s = corpus_stats({make_dialog("d", {{"one two three", OQ}, {"a b c d e", PA}})});
    EXPECT_EQ(s.n_dialogs, 1u);
    EXPECT_EQ(s.avg_turns, 2.0);
    EXPECT_EQ(s.avg_dialog_tokens, 8.0);
    EXPECT_EQ(s.avg_utterance_tokens, 4.0);
    const CorpusStats z = corpus_stats({});
    EXPECT_EQ(z.n_dialogs, 0u);
    EXPECT_EQ(z.avg_turns, 0.0);
    EXPECT_EQ(z.avg_dialog_tokens, 0.0);
    EXPECT_EQ(z.avg_utterance_tokens, 0.0);
    const Json j = stats_to_json(s);
    EXPECT_EQ(j["n_dialogs"], 1);
    EXPECT_EQ(j["intent_counts"]["PA"], 1);
}

TEST(CorpusStats, UtteranceAverageBoundedByDialogAverage) {
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        std::vector<Dialog> c;
        for (int i = 0; i < 5; ++i) c.push_back(solid::testing::random_dialog(rng, "d"));
        const CorpusStats s = corpus_stats(c);
        EXPECT_LE(s.avg_utterance_tokens, s.avg_dialog_tokens);
    }
}
