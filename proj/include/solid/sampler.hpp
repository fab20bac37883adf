#pragma once

// Training-subset construction: BM25 and embedding retrieval, and the
// SeqInt-Bal / Int-Bal / Random-Eq mixing strategies.

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "solid/backend.hpp"
#include "solid/rng.hpp"
#include "solid/taxonomy.hpp"

namespace solid {

// Utterance texts joined by single spaces.
std::string dialog_text(const Dialog& d);

struct Scored {
    std::size_t doc;  // index into the indexed corpus
    double score;

    friend bool operator==(const Scored&, const Scored&) = default;
};

class Bm25Index {
public:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t tf;
    };

    // Throws EmptyCorpus.
    static Bm25Index build(const std::vector<std::string>& documents, double k1 = 1.2, double b = 0.75);
    static Bm25Index build(const std::vector<Dialog>& corpus, double k1 = 1.2, double b = 0.75);

    // Score of every document; query tokens are counted with multiplicity.
    std::vector<double> score_all(const std::vector<std::string>& query_tokens) const;
    // min(k, N) results by descending score, ties by ascending doc index.
    std::vector<Scored> topk(std::string_view query, std::size_t k) const;

    double idf(std::string_view term) const;
    std::size_t document_count() const noexcept { return lengths_.size(); }
    double average_length() const noexcept { return avgdl_; }
    std::size_t length(std::size_t doc) const { return lengths_.at(doc); }
    double k1() const noexcept { return k1_; }
    double b() const noexcept { return b_; }

private:
    struct Term {
        double idf;
        std::vector<Posting> postings;
    };
    std::unordered_map<std::string, Term> terms_;
    std::vector<std::size_t> lengths_;
    double avgdl_ = 0.0;
    double k1_ = 1.2;
    double b_ = 0.75;
};

// ln((N - df + 0.5) / (df + 0.5) + 1)
double bm25_idf(std::size_t n_docs, std::size_t df);

std::vector<Scored> bm25_topk(const Bm25Index& index, const Dialog& query, std::size_t k);

// Ranks by dot product, ties by ascending doc index.
std::vector<Scored> rank_by_dot(const std::vector<EmbeddingVector>& corpus, const EmbeddingVector& query,
                                std::size_t k);

class EmbeddingIndex {
public:
    // Throws EmptyCorpus; backend errors propagate.
    static EmbeddingIndex build(Client& client, const std::vector<Dialog>& corpus, std::size_t batch = 64);

    std::vector<Scored> topk(Client& client, const Dialog& query, std::size_t k) const;
    const std::vector<EmbeddingVector>& vectors() const noexcept { return vectors_; }

private:
    std::vector<EmbeddingVector> vectors_;
};

std::vector<Scored> embed_topk(Client& client, const std::vector<Dialog>& corpus, const Dialog& query,
                               std::size_t k);

enum class RetrievalMethod { Bm25, Embed };
enum class DedupKey { Id, Content };

// FNV-1a over utterance actors, texts and intents.
std::uint64_t dialog_content_hash(const Dialog& d);

struct RetrievalResult {
    std::vector<Dialog> dialogs;  // first-retrieval order
    std::size_t pre_dedup = 0;
    std::size_t post_dedup = 0;
};

// Union of per-query top-k lists with duplicates removed. `client` is
// required for the embedding method.
RetrievalResult retrieve_subset(const std::vector<Dialog>& queries, const std::vector<Dialog>& corpus,
                                std::size_t k, RetrievalMethod method, DedupKey dedup = DedupKey::Id,
                                Client* client = nullptr);

// Canonical text of a dialog's intent sequence.
std::string sequence_signature(const Dialog& d);

struct Shortfall {
    std::string signature;
    std::size_t human = 0;
    std::size_t supply = 0;
    std::size_t reached = 0;
};

struct SeqIntBalResult {
    std::vector<Dialog> sampled;  // synthetic input order
    std::vector<Shortfall> shortfalls;
};

SeqIntBalResult seqint_bal(const std::vector<Dialog>& human, const std::vector<Dialog>& synthetic,
                           std::size_t min_count, Rng& rng);

using IntentCounts = std::array<std::size_t, kIntentCount>;

// Utterances carrying each intent.
IntentCounts intent_counts(const std::vector<Dialog>& dialogs);
std::size_t intent_spread(const IntentCounts& c);

struct IntBalResult {
    std::vector<Dialog> sampled;  // selection order
    IntentCounts before{};
    IntentCounts after{};
};

// Greedy: repeatedly adds the synthetic dialog that best fills the gaps to
// the largest per-intent human count, never pushing any intent above it,
// until every intent is within `tolerance` of it or nothing fits.
IntBalResult int_bal(const std::vector<Dialog>& human, const std::vector<Dialog>& synthetic, Rng& rng,
                     std::size_t tolerance = 1);

// Exactly |human| synthetic dialogs without replacement. Throws Undersupply.
std::vector<Dialog> random_eq(const std::vector<Dialog>& human, const std::vector<Dialog>& synthetic, Rng& rng);

}  // namespace solid
