#pragma once

// Independent reference implementations the library is checked against.
// They share no code with src/ beyond the data types.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "solid/taxonomy.hpp"

namespace solid::oracle {

inline std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c >= 0x80) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct Ranked {
    std::size_t doc;
    double score;
};

// Okapi BM25 scored document by document, then a stable sort on score
// (ties keep ascending document order).
inline std::vector<Ranked> bm25_rank(const std::vector<std::string>& docs, const std::string& query,
                                     std::size_t k, double k1 = 1.2, double b = 0.75) {
    const std::size_t n = docs.size();
    std::vector<std::vector<std::string>> toks;
    double total = 0;
    for (const std::string& d : docs) {
        toks.push_back(words(d));
        total += static_cast<double>(toks.back().size());
    }
    const double avgdl = total / static_cast<double>(n);

    const std::vector<std::string> qs = words(query);
    std::vector<std::size_t> dfs;
    for (const std::string& q : qs) {
        std::size_t df = 0;
        for (const auto& t : toks) df += std::find(t.begin(), t.end(), q) != t.end();
        dfs.push_back(df);
    }

    std::vector<Ranked> all;
    for (std::size_t d = 0; d < n; ++d) {
        double score = 0.0;
        const double dl = static_cast<double>(toks[d].size());
        for (std::size_t i = 0; i < qs.size(); ++i) {
            const std::size_t df = dfs[i];
            if (df == 0) continue;
            const double tf = static_cast<double>(std::count(toks[d].begin(), toks[d].end(), qs[i]));
            if (tf == 0) continue;
            const double idf = std::log((static_cast<double>(n) - static_cast<double>(df) + 0.5) /
                                            (static_cast<double>(df) + 0.5) +
                                        1.0);
            const double ratio = avgdl > 0.0 ? dl / avgdl : 1.0;
            score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * ratio));
        }
        all.push_back({d, score});
    }
    std::stable_sort(all.begin(), all.end(), [](const Ranked& a, const Ranked& c) { return a.score > c.score; });
    if (all.size() > k) all.resize(k);
    return all;
}

// Sample precision and label-pair micro F1 by explicit enumeration.
struct Counts {
    double precision = 0;
    double f1_micro = 0;
    std::size_t tp = 0, fp = 0, fn = 0;
};

inline Counts enumerate(const std::vector<IntentSet>& gold, const std::vector<IntentSet>& pred) {
    Counts c;
    double psum = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        std::size_t hit = 0;
        for (IntentCode code : kAllIntents) {
            const bool g = gold[i].contains(code), p = pred[i].contains(code);
            c.tp += g && p;
            c.fp += !g && p;
            c.fn += g && !p;
            hit += g && p;
        }
        psum += static_cast<double>(hit) / static_cast<double>(pred[i].size());
    }
    c.precision = gold.empty() ? 0.0 : psum / static_cast<double>(gold.size());
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    c.f1_micro = denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
    return c;
}

// Perceptron over dense vectors; returns true if it reaches zero training
// errors within `epochs`, which certifies linear separability.
inline bool perceptron_separates(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                 int epochs = 1000) {
    const std::size_t dim = x.empty() ? 0 : x[0].size();
    std::vector<double> w(dim, 0.0);
    double bias = 0.0;
    for (int e = 0; e < epochs; ++e) {
        std::size_t errors = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double s = bias;
            for (std::size_t j = 0; j < dim; ++j) s += w[j] * x[i][j];
            const int sign = y[i] ? 1 : -1;
            if (s * sign <= 0) {
                ++errors;
                for (std::size_t j = 0; j < dim; ++j) w[j] += sign * x[i][j];
                bias += sign;
            }
        }
        if (errors == 0) return true;
    }
    return false;
}

}  // namespace solid::oracle
