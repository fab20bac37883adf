#include "solid/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include "solid/errors.hpp"
#include "solid/tokenize.hpp"

namespace solid {

namespace {

std::vector<Scored> select_topk(const std::vector<double>& scores, std::size_t k) {
    std::vector<Scored> all;
    all.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) all.push_back({i, scores[i]});
    const std::size_t n = std::min(k, all.size());
    auto better = [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc < b.doc;
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), better);
    all.resize(n);
    return all;
}

}  // namespace

std::string dialog_text(const Dialog& d) {
    std::string out;
    for (const Utterance& u : d.utterances) {
        if (!out.empty()) out += ' ';
        out += u.text;
    }
    return out;
}

double bm25_idf(std::size_t n_docs, std::size_t df) {
    const double n = static_cast<double>(n_docs);
    const double f = static_cast<double>(df);
    return std::log((n - f + 0.5) / (f + 0.5) + 1.0);
}

Bm25Index Bm25Index::build(const std::vector<std::string>& documents, double k1, double b) {
    if (documents.empty()) throw EmptyCorpus("BM25 corpus is empty");
    Bm25Index idx;
    idx.k1_ = k1;
    idx.b_ = b;
    std::size_t total = 0;
    for (std::size_t d = 0; d < documents.size(); ++d) {
        const std::vector<std::string> toks = tokenize(documents[d]);
        idx.lengths_.push_back(toks.size());
        total += toks.size();
        std::map<std::string_view, std::uint32_t> tf;
        for (const std::string& t : toks) ++tf[t];
        for (const auto& [term, count] : tf) {
            idx.terms_[std::string(term)].postings.push_back({static_cast<std::uint32_t>(d), count});
        }
    }
    idx.avgdl_ = static_cast<double>(total) / static_cast<double>(documents.size());
    for (auto& [term, t] : idx.terms_) t.idf = bm25_idf(documents.size(), t.postings.size());
    return idx;
}

Bm25Index Bm25Index::build(const std::vector<Dialog>& corpus, double k1, double b) {
    std::vector<std::string> docs;
    docs.reserve(corpus.size());
    for (const Dialog& d : corpus) docs.push_back(dialog_text(d));
    return build(docs, k1, b);
}

double Bm25Index::idf(std::string_view term) const {
    auto it = terms_.find(std::string(term));
    return it == terms_.end() ? bm25_idf(document_count(), 0) : it->second.idf;
}

std::vector<double> Bm25Index::score_all(const std::vector<std::string>& query_tokens) const {
    std::vector<double> scores(lengths_.size(), 0.0);
    for (const std::string& q : query_tokens) {
        auto it = terms_.find(q);
        if (it == terms_.end()) continue;
        const double idf = it->second.idf;
        for (const Posting& p : it->second.postings) {
            const double tf = p.tf;
            const double dl = static_cast<double>(lengths_[p.doc]);
            // An all-empty corpus has avgdl 0; treat every length ratio as 1.
            const double ratio = avgdl_ > 0.0 ? dl / avgdl_ : 1.0;
            scores[p.doc] += idf * (tf * (k1_ + 1.0)) / (tf + k1_ * (1.0 - b_ + b_ * ratio));
        }
    }
    return scores;
}

std::vector<Scored> Bm25Index::topk(std::string_view query, std::size_t k) const {
    if (k == 0) throw PreconditionError("k must be at least 1");
    return select_topk(score_all(tokenize(query)), k);
}

std::vector<Scored> bm25_topk(const Bm25Index& index, const Dialog& query, std::size_t k) {
    return index.topk(dialog_text(query), k);
}

std::vector<Scored> rank_by_dot(const std::vector<EmbeddingVector>& corpus, const EmbeddingVector& query,
                                std::size_t k) {
    if (corpus.empty()) throw EmptyCorpus("embedding corpus is empty");
    if (k == 0) throw PreconditionError("k must be at least 1");
    std::vector<double> scores(corpus.size(), 0.0);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus[i].size() != query.size()) throw PreconditionError("embedding dimensions differ");
        double s = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) s += corpus[i][j] * query[j];
        scores[i] = s;
    }
    return select_topk(scores, k);
}

EmbeddingIndex EmbeddingIndex::build(Client& client, const std::vector<Dialog>& corpus, std::size_t batch) {
    if (corpus.empty()) throw EmptyCorpus("embedding corpus is empty");
    batch = std::max<std::size_t>(1, batch);
    EmbeddingIndex idx;
    idx.vectors_.reserve(corpus.size());
    for (std::size_t start = 0; start < corpus.size(); start += batch) {
        std::vector<std::string> texts;
        for (std::size_t i = start; i < std::min(corpus.size(), start + batch); ++i) {
            std::string t = dialog_text(corpus[i]);
            texts.push_back(t.empty() ? std::string(" ") : std::move(t));
        }
        for (EmbeddingVector& v : client.embed(texts)) idx.vectors_.push_back(std::move(v));
    }
    return idx;
}

std::vector<Scored> EmbeddingIndex::topk(Client& client, const Dialog& query, std::size_t k) const {
    std::string t = dialog_text(query);
    const EmbeddingVector q = client.embed({t.empty() ? std::string(" ") : t}).at(0);
    return rank_by_dot(vectors_, q, k);
}

std::vector<Scored> embed_topk(Client& client, const std::vector<Dialog>& corpus, const Dialog& query,
                               std::size_t k) {
    return EmbeddingIndex::build(client, corpus).topk(client, query, k);
}

std::uint64_t dialog_content_hash(const Dialog& d) {
    Fnv1a h;
    for (const Utterance& u : d.utterances) {
        h.update(actor_name(u.actor)).update("\x1f").update(u.text).update("\x1f");
        h.update_u64(u.intents.mask()).update("\x1e");
    }
    return h.digest();
}

RetrievalResult retrieve_subset(const std::vector<Dialog>& queries, const std::vector<Dialog>& corpus,
                                std::size_t k, RetrievalMethod method, DedupKey dedup, Client* client) {
    if (k == 0) throw PreconditionError("k must be at least 1");
    RetrievalResult out;
    if (queries.empty()) return out;
    std::vector<std::vector<Scored>> hits;
    if (method == RetrievalMethod::Bm25) {
        const Bm25Index index = Bm25Index::build(corpus);
        for (const Dialog& q : queries) hits.push_back(bm25_topk(index, q, k));
    } else {
        if (!client) throw PreconditionError("embedding retrieval needs a backend");
        const EmbeddingIndex index = EmbeddingIndex::build(*client, corpus);
        for (const Dialog& q : queries) hits.push_back(index.topk(*client, q, k));
    }
    std::unordered_set<std::string> seen_ids;
    std::unordered_set<std::uint64_t> seen_hashes;
    for (const std::vector<Scored>& list : hits) {
        for (const Scored& s : list) {
            ++out.pre_dedup;
            const Dialog& d = corpus[s.doc];
            const bool fresh = dedup == DedupKey::Id ? seen_ids.insert(d.id).second
                                                     : seen_hashes.insert(dialog_content_hash(d)).second;
            if (fresh) out.dialogs.push_back(d);
        }
    }
    out.post_dedup = out.dialogs.size();
    return out;
}

std::string sequence_signature(const Dialog& d) { return render_sequence(sequence_of(d)); }

SeqIntBalResult seqint_bal(const std::vector<Dialog>& human, const std::vector<Dialog>& synthetic,
                           std::size_t min_count, Rng& rng) {
    if (min_count == 0) throw PreconditionError("min_count must be positive");
    std::map<std::string, std::size_t> human_count;
    std::map<std::string, std::vector<std::size_t>> supply;
    for (const Dialog& d : human) ++human_count[sequence_signature(d)];
    for (std::size_t i = 0; i < synthetic.size(); ++i) supply[sequence_signature(synthetic[i])].push_back(i);

    std::set<std::string> signatures;
    for (const auto& [s, n] : human_count) signatures.insert(s);
    for (const auto& [s, v] : supply) signatures.insert(s);

    SeqIntBalResult out;
    std::vector<std::size_t> chosen;
    for (const std::string& sig : signatures) {
        const std::size_t h = human_count.count(sig) ? human_count[sig] : 0;
        std::vector<std::size_t> pool = supply.count(sig) ? supply[sig] : std::vector<std::size_t>{};
        const std::size_t target = std::min(min_count, h + pool.size());
        const std::size_t need = target > h ? target - h : 0;
        rng.shuffle(pool);
        chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(need));
        if (h + pool.size() < min_count) out.shortfalls.push_back({sig, h, pool.size(), h + need});
    }
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i : chosen) out.sampled.push_back(synthetic[i]);
    return out;
}

IntentCounts intent_counts(const std::vector<Dialog>& dialogs) {
    IntentCounts c{};
    for (const Dialog& d : dialogs) {
        for (const Utterance& u : d.utterances) {
            for (IntentCode code : u.intents.codes()) ++c[index_of(code)];
        }
    }
    return c;
}

std::size_t intent_spread(const IntentCounts& c) {
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    return *hi - *lo;
}

IntBalResult int_bal(const std::vector<Dialog>& human, const std::vector<Dialog>& synthetic, Rng& rng,
                     std::size_t tolerance) {
    IntBalResult out;
    out.before = intent_counts(human);
    out.after = out.before;
    const std::size_t target = *std::max_element(out.before.begin(), out.before.end());

    std::vector<IntentCounts> adds;
    adds.reserve(synthetic.size());
    for (const Dialog& d : synthetic) adds.push_back(intent_counts({d}));

    std::vector<std::size_t> order(synthetic.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    auto balanced = [&] {
        for (std::size_t c : out.after) {
            if (c + tolerance < target) return false;
        }
        return true;
    };

    while (!order.empty() && !balanced()) {
        std::size_t best_pos = std::numeric_limits<std::size_t>::max();
        double best_gain = 0.0;
        std::vector<std::size_t> keep;
        keep.reserve(order.size());
        for (std::size_t idx : order) {
            const IntentCounts& a = adds[idx];
            bool fits = true;
            double gain = 0.0;
            for (std::size_t c = 0; c < kIntentCount; ++c) {
                if (out.after[c] + a[c] > target) {
                    fits = false;
                    break;
                }
                gain += static_cast<double>(a[c]) * static_cast<double>(target - out.after[c]);
            }
            // Counts only grow, so a dialog that no longer fits never will.
            if (!fits) continue;
            if (gain > best_gain) {
                best_gain = gain;
                best_pos = keep.size();
            }
            keep.push_back(idx);
        }
        if (best_pos == std::numeric_limits<std::size_t>::max()) break;
        const std::size_t pick = keep[best_pos];
        keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(best_pos));
        order = std::move(keep);
        for (std::size_t c = 0; c < kIntentCount; ++c) out.after[c] += adds[pick][c];
        out.sampled.push_back(synthetic[pick]);
    }
    return out;
}

std::vector<Dialog> random_eq(const std::vector<Dialog>& human, const std::vector<Dialog>& synthetic, Rng& rng) {
    if (synthetic.size() < human.size()) {
        throw Undersupply("random-eq needs " + std::to_string(human.size()) + " synthetic dialogs, have " +
                          std::to_string(synthetic.size()));
    }
    std::vector<std::size_t> idx(synthetic.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    idx.resize(human.size());
    std::sort(idx.begin(), idx.end());
    std::vector<Dialog> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(synthetic[i]);
    return out;
}

}  // namespace solid
