#include "solid/ipeval.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "solid/errors.hpp"
#include "solid/rng.hpp"
#include "solid/text.hpp"
#include "solid/tokenize.hpp"

namespace solid {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

}  // namespace

double dot(const SparseVector& x, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x.value[i] * w[x.index[i]];
    return s;
}

std::vector<LabeledUtterance> utterances_of(const std::vector<Dialog>& dialogs) {
    std::vector<LabeledUtterance> out;
    for (const Dialog& d : dialogs) {
        for (std::size_t k = 0; k < d.utterances.size(); ++k) {
            out.push_back({k ? d.utterances[k - 1].text : std::string(), d.utterances[k].text,
                           d.utterances[k].intents});
        }
    }
    return out;
}

std::vector<std::string> feature_terms(std::string_view previous, std::string_view text) {
    std::vector<std::string> out;
    const std::vector<std::string> cur = tokenize(text);
    for (std::size_t i = 0; i < cur.size(); ++i) {
        out.push_back("u:" + cur[i]);
        if (i + 1 < cur.size()) out.push_back("u:" + cur[i] + "_" + cur[i + 1]);
    }
    for (const std::string& t : tokenize(previous)) out.push_back("p:" + t);
    return out;
}

FeatureSpace FeatureSpace::fit(const std::vector<LabeledUtterance>& data) {
    std::map<std::string, std::size_t> df;
    for (const LabeledUtterance& u : data) {
        std::vector<std::string> terms = feature_terms(u.previous, u.text);
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
        for (std::string& t : terms) ++df[std::move(t)];
    }
    std::vector<std::string> terms;
    std::vector<double> idf;
    const double n = static_cast<double>(data.size());
    for (const auto& [t, f] : df) {
        terms.push_back(t);
        idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(f))) + 1.0);
    }
    return from_parts(std::move(terms), std::move(idf));
}

FeatureSpace FeatureSpace::from_parts(std::vector<std::string> terms, std::vector<double> idf) {
    if (terms.size() != idf.size()) throw PreconditionError("feature terms and idf differ in length");
    FeatureSpace fs;
    fs.terms_ = std::move(terms);
    fs.idf_ = std::move(idf);
    for (std::size_t i = 0; i < fs.terms_.size(); ++i) fs.lookup_.emplace(fs.terms_[i], static_cast<std::uint32_t>(i));
    return fs;
}

SparseVector FeatureSpace::transform(std::string_view previous, std::string_view text) const {
    std::map<std::uint32_t, double> tf;
    for (const std::string& t : feature_terms(previous, text)) {
        auto it = lookup_.find(t);
        if (it != lookup_.end()) tf[it->second] += 1.0;
    }
    SparseVector x;
    double norm = 0.0;
    for (const auto& [i, c] : tf) {
        const double v = c * idf_[i];
        x.index.push_back(i);
        x.value.push_back(v);
        norm += v * v;
    }
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : x.value) v /= norm;
    }
    return x;
}

double head_objective(const std::vector<SparseVector>& x, const std::vector<std::uint8_t>& y,
                      const std::vector<double>& w, double bias, double l2, std::vector<double>* grad_w,
                      double* grad_bias) {
    if (x.size() != y.size()) throw LengthMismatch("features and labels differ in length");
    if (x.empty()) throw EmptyTraining("objective over zero samples");
    const double n = static_cast<double>(x.size());
    if (grad_w) grad_w->assign(w.size(), 0.0);
    double gb = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = dot(x[i], w) + bias;
        // BCE(sigmoid(z), y) = softplus(z) - y * z
        loss += softplus(z) - (y[i] ? z : 0.0);
        const double r = sigmoid(z) - (y[i] ? 1.0 : 0.0);
        gb += r;
        if (grad_w) {
            for (std::size_t j = 0; j < x[i].size(); ++j) (*grad_w)[x[i].index[j]] += r * x[i].value[j];
        }
    }
    double reg = 0.0;
    for (double v : w) reg += v * v;
    loss = loss / n + 0.5 * l2 * reg;
    if (grad_w) {
        for (std::size_t j = 0; j < w.size(); ++j) (*grad_w)[j] = (*grad_w)[j] / n + l2 * w[j];
    }
    if (grad_bias) *grad_bias = gb / n;
    return loss;
}

std::array<double, kIntentCount> IPModel::scores(const SparseVector& x) const {
    std::array<double, kIntentCount> s{};
    for (std::size_t c = 0; c < kIntentCount; ++c) s[c] = sigmoid(dot(x, weights[c]) + bias[c]);
    return s;
}

IPModel train_ip(const std::vector<Dialog>& train, const TrainConfig& config) {
    return train_ip(utterances_of(train), config);
}

IPModel train_ip(const std::vector<LabeledUtterance>& train, const TrainConfig& config) {
    if (train.empty()) throw EmptyTraining("no labelled utterances to train on");
    if (!(config.threshold > 0.0 && config.threshold < 1.0)) throw PreconditionError("threshold must be in (0, 1)");
    if (config.epochs < 0 || config.batch_size == 0) throw PreconditionError("invalid training schedule");

    IPModel m;
    m.config = config;
    m.features = FeatureSpace::fit(train);
    const std::size_t dim = m.features.dimension();
    const std::size_t n = train.size();

    std::vector<SparseVector> x;
    x.reserve(n);
    for (const LabeledUtterance& u : train) x.push_back(m.features.transform(u.previous, u.text));
    std::array<std::vector<std::uint8_t>, kIntentCount> y;
    for (std::size_t c = 0; c < kIntentCount; ++c) {
        y[c].resize(n);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            y[c][i] = train[i].intents.contains(kAllIntents[c]) ? 1 : 0;
            pos += y[c][i];
        }
        const double prior = std::clamp(static_cast<double>(pos) / static_cast<double>(n), 1e-3, 1.0 - 1e-3);
        m.bias[c] = std::log(prior / (1.0 - prior));
        m.weights[c].assign(dim, 0.0);
    }

    auto total_loss = [&] {
        double s = 0.0;
        for (std::size_t c = 0; c < kIntentCount; ++c) s += head_objective(x, y[c], m.weights[c], m.bias[c], config.l2);
        return s;
    };
    m.loss_history.push_back(total_loss());

    // w = scale * v, so the L2 shrink is O(1) per step instead of O(dim).
    std::array<std::vector<double>, kIntentCount> v = m.weights;
    std::array<double, kIntentCount> scale;
    scale.fill(1.0);
    const double decay = 1.0 - config.learning_rate * config.l2;

    Rng rng(config.rng_seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> residual;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t end = std::min(n, start + config.batch_size);
            const double step = config.learning_rate / static_cast<double>(end - start);
            for (std::size_t c = 0; c < kIntentCount; ++c) {
                residual.clear();
                double rsum = 0.0;
                for (std::size_t p = start; p < end; ++p) {
                    const std::size_t i = order[p];
                    const double z = scale[c] * dot(x[i], v[c]) + m.bias[c];
                    const double r = sigmoid(z) - y[c][i];
                    residual.push_back(r);
                    rsum += r;
                }
                scale[c] *= decay;
                for (std::size_t p = start; p < end; ++p) {
                    const SparseVector& xi = x[order[p]];
                    const double g = step * residual[p - start] / scale[c];
                    for (std::size_t j = 0; j < xi.size(); ++j) v[c][xi.index[j]] -= g * xi.value[j];
                }
                m.bias[c] -= step * rsum;
                if (scale[c] < 1e-6) {
                    for (double& e : v[c]) e *= scale[c];
                    scale[c] = 1.0;
                }
            }
        }
        for (std::size_t c = 0; c < kIntentCount; ++c) {
            for (std::size_t j = 0; j < dim; ++j) m.weights[c][j] = scale[c] * v[c][j];
        }
        m.loss_history.push_back(total_loss());
    }
    return m;
}

IntentSet predict_intents(const IPModel& model, std::string_view previous, std::string_view text) {
    const std::array<double, kIntentCount> s = model.scores(model.features.transform(previous, text));
    IntentSet::Mask mask = 0;
    std::size_t best = 0;
    for (std::size_t c = 0; c < kIntentCount; ++c) {
        if (s[c] > model.config.threshold) mask |= IntentSet::bit(kAllIntents[c]);
        if (s[c] > s[best]) best = c;
    }
    return mask ? IntentSet::from_mask(mask) : IntentSet(kAllIntents[best]);
}

IntentSet predict_intents(const IPModel& model, const Dialog& dialog, std::size_t turn_index) {
    if (turn_index >= dialog.utterances.size()) throw PreconditionError("turn index out of range");
    return predict_intents(model, turn_index ? dialog.utterances[turn_index - 1].text : std::string(),
                           dialog.utterances[turn_index].text);
}

Json model_to_json(const IPModel& m) {
    Json j;
    j["format"] = "solid-ip-model/1";
    j["config"] = {
        {"learning_rate", m.config.learning_rate}, {"l2", m.config.l2},
        {"epochs", m.config.epochs},               {"batch_size", m.config.batch_size},
        {"threshold", m.config.threshold},         {"rng_seed", m.config.rng_seed},
    };
    j["terms"] = m.features.terms();
    j["idf"] = m.features.idf();
    Json heads = Json::object();
    for (std::size_t c = 0; c < kIntentCount; ++c) {
        Json h;
        h["bias"] = m.bias[c];
        // Non-zero weights only, as parallel index/value arrays.
        Json idx = Json::array(), val = Json::array();
        for (std::size_t t = 0; t < m.weights[c].size(); ++t) {
            if (m.weights[c][t] != 0.0) {
                idx.push_back(t);
                val.push_back(m.weights[c][t]);
            }
        }
        h["index"] = std::move(idx);
        h["value"] = std::move(val);
        heads[std::string(code_of(kAllIntents[c]))] = std::move(h);
    }
    j["heads"] = std::move(heads);
    j["loss_history"] = m.loss_history;
    return j;
}

IPModel model_from_json(const Json& j) {
    try {
        IPModel m;
        const Json& cfg = j.at("config");
        m.config.learning_rate = cfg.at("learning_rate").get<double>();
        m.config.l2 = cfg.at("l2").get<double>();
        m.config.epochs = cfg.at("epochs").get<int>();
        m.config.batch_size = cfg.at("batch_size").get<std::size_t>();
        m.config.threshold = cfg.at("threshold").get<double>();
        m.config.rng_seed = cfg.at("rng_seed").get<std::uint64_t>();
        m.features = FeatureSpace::from_parts(j.at("terms").get<std::vector<std::string>>(),
                                              j.at("idf").get<std::vector<double>>());
        const std::size_t dim = m.features.dimension();
        for (std::size_t c = 0; c < kIntentCount; ++c) {
            const Json& h = j.at("heads").at(std::string(code_of(kAllIntents[c])));
            m.bias[c] = h.at("bias").get<double>();
            m.weights[c].assign(dim, 0.0);
            const auto idx = h.at("index").get<std::vector<std::size_t>>();
            const auto val = h.at("value").get<std::vector<double>>();
            if (idx.size() != val.size()) throw PreconditionError("head index/value lengths differ");
            for (std::size_t t = 0; t < idx.size(); ++t) m.weights[c].at(idx[t]) = val[t];
        }
        if (j.contains("loss_history")) m.loss_history = j.at("loss_history").get<std::vector<double>>();
        return m;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError("model", e.what());
    }
}

void save_model(const std::filesystem::path& path, const IPModel& m) {
    write_text_file(path, model_to_json(m).dump() + "\n");
}

IPModel load_model(const std::filesystem::path& path) {
    try {
        return model_from_json(Json::parse(read_text_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), e.what());
    }
}

MetricsReport evaluate(const std::vector<IntentSet>& gold, const std::vector<IntentSet>& pred) {
    if (gold.size() != pred.size()) {
        throw LengthMismatch("gold has " + std::to_string(gold.size()) + " samples, predictions " +
                             std::to_string(pred.size()));
    }
    MetricsReport r;
    r.n_samples = gold.size();
    std::array<std::size_t, kIntentCount> tp{}, fp{}, fn{};
    double precision_sum = 0.0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const IntentSet::Mask g = gold[i].mask(), p = pred[i].mask();
        precision_sum += static_cast<double>(std::popcount(static_cast<unsigned>(g & p))) /
                         static_cast<double>(std::popcount(static_cast<unsigned>(p)));
        for (std::size_t c = 0; c < kIntentCount; ++c) {
            const IntentSet::Mask b = IntentSet::bit(kAllIntents[c]);
            const bool in_g = g & b, in_p = p & b;
            tp[c] += in_g && in_p;
            fp[c] += !in_g && in_p;
            fn[c] += in_g && !in_p;
        }
    }
    r.precision = gold.empty() ? 0.0 : precision_sum / static_cast<double>(gold.size());
    std::size_t TP = 0, FP = 0, FN = 0;
    double macro = 0.0;
    for (std::size_t c = 0; c < kIntentCount; ++c) {
        LabelMetrics& l = r.per_label[c];
        l.precision = safe_div(static_cast<double>(tp[c]), static_cast<double>(tp[c] + fp[c]));
        l.recall = safe_div(static_cast<double>(tp[c]), static_cast<double>(tp[c] + fn[c]));
        l.f1 = safe_div(2.0 * static_cast<double>(tp[c]), static_cast<double>(2 * tp[c] + fp[c] + fn[c]));
        l.support = tp[c] + fn[c];
        macro += l.f1;
        TP += tp[c];
        FP += fp[c];
        FN += fn[c];
    }
    r.f1_micro = safe_div(2.0 * static_cast<double>(TP), static_cast<double>(2 * TP + FP + FN));
    r.f1_macro = macro / static_cast<double>(kIntentCount);
    return r;
}

MetricsReport evaluate_model(const IPModel& model, const std::vector<Dialog>& test) {
    std::vector<IntentSet> gold, pred;
    for (const LabeledUtterance& u : utterances_of(test)) {
        gold.push_back(u.intents);
        pred.push_back(predict_intents(model, u.previous, u.text));
    }
    return evaluate(gold, pred);
}

Json report_to_json(const MetricsReport& r) {
    Json j;
    j["precision"] = r.precision;
    j["f1_micro"] = r.f1_micro;
    j["f1_macro"] = r.f1_macro;
    j["n_samples"] = r.n_samples;
    Json per = Json::object();
    for (std::size_t c = 0; c < kIntentCount; ++c) {
        const LabelMetrics& l = r.per_label[c];
        per[std::string(code_of(kAllIntents[c]))] = {
            {"precision", l.precision}, {"recall", l.recall}, {"f1", l.f1}, {"support", l.support}};
    }
    j["per_label"] = std::move(per);
    return j;
}

MetricsReport report_from_json(const Json& j) {
    try {
        MetricsReport r;
        r.precision = j.at("precision").get<double>();
        r.f1_micro = j.at("f1_micro").get<double>();
        r.f1_macro = j.at("f1_macro").get<double>();
        r.n_samples = j.value("n_samples", std::size_t{0});
        for (std::size_t c = 0; c < kIntentCount; ++c) {
            const Json& l = j.at("per_label").at(std::string(code_of(kAllIntents[c])));
            r.per_label[c] = {l.at("precision").get<double>(), l.at("recall").get<double>(),
                              l.at("f1").get<double>(), l.at("support").get<std::size_t>()};
        }
        return r;
    } catch (const std::exception& e) {
        throw ParseError("report", e.what());
    }
}

IntentSet majority_singleton(const std::vector<Dialog>& train) {
    std::array<std::size_t, kIntentCount> counts{};
    for (const Dialog& d : train) {
        for (const Utterance& u : d.utterances) {
            for (IntentCode c : u.intents.codes()) ++counts[index_of(c)];
        }
    }
    const auto best = std::max_element(counts.begin(), counts.end()) - counts.begin();
    return IntentSet(kAllIntents[static_cast<std::size_t>(best)]);
}

IntentSet parse_fewshot_reply(std::string_view reply) {
    std::string line = text::trim(text::split_lines(reply).empty() ? std::string() : text::split_lines(reply).front());
    while (!line.empty() && (line.back() == '.' || line.back() == '!')) line.pop_back();
    try {
        IntentSetSyntax syntax;
        syntax.accept_commas = true;
        return parse_intent_set(line, syntax);
    } catch (const Error&) {
    }
    // Lenient: uppercase codes as whole words, or full labels anywhere.
    IntentSet::Mask mask = 0;
    const std::string lower = text::to_lower(reply);
    for (IntentCode c : kAllIntents) {
        const std::string_view code = code_of(c);
        for (std::size_t pos = reply.find(code); pos != std::string_view::npos; pos = reply.find(code, pos + 1)) {
            const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(reply[pos - 1]));
            const std::size_t end = pos + code.size();
            const bool right = end >= reply.size() || !std::isalnum(static_cast<unsigned char>(reply[end]));
            if (left && right) {
                mask |= IntentSet::bit(c);
                break;
            }
        }
        if (c != IntentCode::O && lower.find(label_of(c)) != std::string::npos) mask |= IntentSet::bit(c);
    }
    return mask ? IntentSet::from_mask(mask) : IntentSet(IntentCode::O);
}

IntentSet fewshot_predict(Client& client, const Dialog& dialog, std::size_t turn_index,
                          const std::vector<prompts::LabeledExample>& shots, const GenerationParams& params) {
    if (shots.empty()) throw PreconditionError("few-shot prediction needs at least one shot");
    if (turn_index >= dialog.utterances.size()) throw PreconditionError("turn index out of range");
    const std::string prompt = prompts::few_shot(
        shots, turn_index ? dialog.utterances[turn_index - 1].text : std::string(), dialog.utterances[turn_index].text);
    return parse_fewshot_reply(client.complete({{ChatMessage::Role::User, prompt}}, params));
}

CorpusStats corpus_stats(const std::vector<Dialog>& corpus) {
    CorpusStats s;
    s.n_dialogs = corpus.size();
    std::size_t turns = 0, tokens = 0;
    for (const Dialog& d : corpus) {
        turns += d.utterances.size();
        for (const Utterance& u : d.utterances) {
            tokens += text::split_whitespace(u.text).size();
            for (IntentCode c : u.intents.codes()) ++s.intent_counts[index_of(c)];
        }
    }
    if (s.n_dialogs) {
        s.avg_turns = static_cast<double>(turns) / static_cast<double>(s.n_dialogs);
        s.avg_dialog_tokens = static_cast<double>(tokens) / static_cast<double>(s.n_dialogs);
    }
    if (turns) s.avg_utterance_tokens = static_cast<double>(tokens) / static_cast<double>(turns);
    return s;
}

Json stats_to_json(const CorpusStats& s) {
    Json j;
    j["n_dialogs"] = s.n_dialogs;
    j["avg_turns"] = s.avg_turns;
    j["avg_dialog_tokens"] = s.avg_dialog_tokens;
    j["avg_utterance_tokens"] = s.avg_utterance_tokens;
    Json counts = Json::object();
    for (std::size_t c = 0; c < kIntentCount; ++c) counts[std::string(code_of(kAllIntents[c]))] = s.intent_counts[c];
    j["intent_counts"] = std::move(counts);
    return j;
}

}  // namespace solid
