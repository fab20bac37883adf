#pragma once

// Intent prediction: TF-IDF features, one-vs-rest logistic heads trained by
// mini-batch gradient descent, multi-label metrics, few-shot prediction
// through a backend, and corpus statistics.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "solid/backend.hpp"
#include "solid/prompts.hpp"
#include "solid/serialize.hpp"
#include "solid/taxonomy.hpp"

namespace solid {

struct SparseVector {
    std::vector<std::uint32_t> index;  // ascending
    std::vector<double> value;

    std::size_t size() const noexcept { return index.size(); }
};

double dot(const SparseVector& x, const std::vector<double>& w);

// One utterance to classify, with the utterance before it ("" for the first).
struct LabeledUtterance {
    std::string previous;
    std::string text;
    IntentSet intents{IntentCode::O};
};

std::vector<LabeledUtterance> utterances_of(const std::vector<Dialog>& dialogs);

// Raw feature names: "u:<tok>", "u:<tok>_<tok>" for adjacent pairs of the
// current utterance and "p:<tok>" for the previous one.
std::vector<std::string> feature_terms(std::string_view previous, std::string_view text);

// Vocabulary with smoothed idf, ln((1 + N) / (1 + df)) + 1. Vectors are
// L2-normalised; unknown terms are ignored.
class FeatureSpace {
public:
    static FeatureSpace fit(const std::vector<LabeledUtterance>& data);

    SparseVector transform(std::string_view previous, std::string_view text) const;
    std::size_t dimension() const noexcept { return terms_.size(); }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    const std::vector<double>& idf() const noexcept { return idf_; }

    static FeatureSpace from_parts(std::vector<std::string> terms, std::vector<double> idf);

private:
    std::vector<std::string> terms_;
    std::vector<double> idf_;
    std::unordered_map<std::string, std::uint32_t> lookup_;
};

struct TrainConfig {
    double learning_rate = 0.1;
    double l2 = 1e-4;
    int epochs = 30;
    std::size_t batch_size = 32;
    double threshold = 0.5;
    std::uint64_t rng_seed = 1;
};

// Mean binary cross-entropy of one logistic head over (x, y) plus
// (l2 / 2) * ||w||^2; the bias is not regularised. Gradients are written
// when the pointers are non-null.
double head_objective(const std::vector<SparseVector>& x, const std::vector<std::uint8_t>& y,
                      const std::vector<double>& w, double bias, double l2,
                      std::vector<double>* grad_w = nullptr, double* grad_bias = nullptr);

struct IPModel {
    FeatureSpace features;
    std::array<std::vector<double>, kIntentCount> weights;
    std::array<double, kIntentCount> bias{};
    TrainConfig config;
    // Summed objective over the 12 heads after each epoch; entry 0 is the
    // initial model.
    std::vector<double> loss_history;

    std::array<double, kIntentCount> scores(const SparseVector& x) const;
};

// Throws EmptyTraining when there is nothing to learn from.
IPModel train_ip(const std::vector<Dialog>& train, const TrainConfig& config = {});
IPModel train_ip(const std::vector<LabeledUtterance>& train, const TrainConfig& config = {});

// Labels scoring above the threshold, or the single best label if none do.
IntentSet predict_intents(const IPModel& model, const Dialog& dialog, std::size_t turn_index);
IntentSet predict_intents(const IPModel& model, std::string_view previous, std::string_view text);

Json model_to_json(const IPModel& m);
IPModel model_from_json(const Json& j);
void save_model(const std::filesystem::path& path, const IPModel& m);
IPModel load_model(const std::filesystem::path& path);

struct LabelMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  // gold occurrences
};

struct MetricsReport {
    double precision = 0.0;
    double f1_micro = 0.0;
    double f1_macro = 0.0;
    std::array<LabelMetrics, kIntentCount> per_label{};
    std::size_t n_samples = 0;
};

// precision: mean of |P n G| / |P| over samples. f1_micro: 2TP / (2TP + FP
// + FN) over (sample, label) pairs. f1_macro: mean of the 12 per-label F1
// values, a label with no TP, FP or FN counting as 0. Throws LengthMismatch.
MetricsReport evaluate(const std::vector<IntentSet>& gold, const std::vector<IntentSet>& pred);
MetricsReport evaluate_model(const IPModel& model, const std::vector<Dialog>& test);

Json report_to_json(const MetricsReport& r);
MetricsReport report_from_json(const Json& j);

// The most frequent single intent of the training data, predicted everywhere.
IntentSet majority_singleton(const std::vector<Dialog>& train);

// Asks the backend with labelled shots; never empty (falls back to {O}).
IntentSet fewshot_predict(Client& client, const Dialog& dialog, std::size_t turn_index,
                          const std::vector<prompts::LabeledExample>& shots, const GenerationParams& params = {});
// Strict code list first, then any codes or labels found in the reply.
IntentSet parse_fewshot_reply(std::string_view reply);

struct CorpusStats {
    std::size_t n_dialogs = 0;
    double avg_turns = 0.0;
    double avg_dialog_tokens = 0.0;
    double avg_utterance_tokens = 0.0;
    std::array<std::size_t, kIntentCount> intent_counts{};
};

CorpusStats corpus_stats(const std::vector<Dialog>& corpus);
Json stats_to_json(const CorpusStats& s);

}  // namespace solid
