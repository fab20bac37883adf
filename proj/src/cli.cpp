#include "solid/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "solid/bundled.hpp"
#include "solid/enrich.hpp"
#include "solid/errors.hpp"
#include "solid/generator.hpp"
#include "solid/http_backend.hpp"
#include "solid/instructor.hpp"
#include "solid/ipeval.hpp"
#include "solid/log.hpp"
#include "solid/manifest.hpp"
#include "solid/mock_backend.hpp"
#include "solid/parallel.hpp"
#include "solid/preference.hpp"
#include "solid/sampler.hpp"
#include "solid/seeder.hpp"

namespace solid::cli {

namespace {

namespace fs = std::filesystem;

struct BackendOpts {
    std::string backend = "mock";
    std::string endpoint = "http://127.0.0.1:8000/v1";
    std::string model = "zephyr-7b-beta";
    std::string embedding_model = "multi-qa-mpnet-base-dot-v1";
    std::string api_key_env = "SOLID_API_KEY";
    int max_in_flight = 8;
    int max_parallel = 0;  // 0: logical CPUs, capped by max_in_flight
    double temperature = 0.7;
    int max_tokens = 512;
    std::uint64_t rng_seed = 1;
    std::string markers = "auto";
};

void add_backend_options(CLI::App* app, BackendOpts& o) {
    app->add_option("--backend", o.backend, "Generation backend")->check(CLI::IsMember({"mock", "http"}));
    app->add_option("--endpoint", o.endpoint, "OpenAI-compatible base URL for --backend http");
    app->add_option("--model", o.model, "Chat model name");
    app->add_option("--embedding-model", o.embedding_model, "Embedding model name");
    app->add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key");
    app->add_option("--max-in-flight", o.max_in_flight, "Concurrent backend requests")->check(CLI::Range(1, 1024));
    app->add_option("--max-parallel", o.max_parallel, "Worker threads (0 = CPU count)")->check(CLI::NonNegativeNumber);
    app->add_option("--temperature", o.temperature, "Sampling temperature");
    app->add_option("--max-tokens", o.max_tokens, "Token limit per completion");
    app->add_option("--rng-seed", o.rng_seed, "Seed for every stochastic choice");
    app->add_option("--intent-markers", o.markers, "Put intent markers in prompts (auto = mock only)")
        ->check(CLI::IsMember({"auto", "on", "off"}));
}

bool markers_on(const BackendOpts& o) {
    return o.markers == "on" || (o.markers == "auto" && o.backend == "mock");
}

std::size_t parallelism(const BackendOpts& o) {
    const std::size_t want = o.max_parallel > 0 ? static_cast<std::size_t>(o.max_parallel) : default_parallelism();
    return std::max<std::size_t>(1, std::min<std::size_t>(want, static_cast<std::size_t>(o.max_in_flight)));
}

GenerationParams params_of(const BackendOpts& o) {
    GenerationParams p;
    p.model = o.model;
    p.temperature = o.temperature;
    p.max_tokens = o.max_tokens;
    p.request_seed = static_cast<std::int64_t>(o.rng_seed >> 1);
    return p;
}

std::unique_ptr<Client> make_client(const BackendOpts& o) {
    std::shared_ptr<Backend> backend;
    if (o.backend == "mock") {
        backend = std::make_shared<MockBackend>();
    } else {
        HttpBackend::Options h;
        h.endpoint = o.endpoint;
        h.model = o.model;
        h.embedding_model = o.embedding_model;
        if (const char* key = std::getenv(o.api_key_env.c_str())) h.api_key = key;
        backend = std::make_shared<HttpBackend>(h);
    }
    RetryPolicy policy;
    policy.jitter_seed = o.rng_seed;
    return std::make_unique<Client>(backend, policy, o.max_in_flight);
}

Json backend_config(const BackendOpts& o) {
    return {
        {"backend", o.backend},           {"model", o.model},
        {"temperature", o.temperature},   {"max_tokens", o.max_tokens},
        {"rng_seed", o.rng_seed},         {"max_in_flight", o.max_in_flight},
        {"intent_markers", markers_on(o)},
    };
}

SequenceCorpus load_sequence_corpus(const std::string& path, const std::string& format, std::size_t& dropped) {
    CorpusImport imp = path.empty()
                           ? parse_canonical_corpus(bundled_sequence_corpus(), "bundled")
                           : import_sequence_corpus(path, format == "msdialog" ? CorpusFormat::MsDialog
                                                                              : CorpusFormat::Canonical);
    dropped = imp.dropped_too_long;
    if (dropped) log::warn("dropped " + std::to_string(dropped) + " sequences longer than 20 utterances");
    return std::move(imp.corpus);
}

std::vector<Dialog> load_optional_dialogs(const std::string& path) {
    return path.empty() ? std::vector<Dialog>{} : load_dialogs(path);
}

void finish(RunManifest& m, const fs::path& primary_output) {
    m.add_output(primary_output);
    m.write(manifest_path_for(primary_output));
}

fs::path sibling(const fs::path& out, std::string_view tag) {
    fs::path p = out;
    const std::string ext = p.extension().string();
    p.replace_extension();
    return fs::path(p.string() + "." + std::string(tag) + ext);
}

// ---- seed ----------------------------------------------------------------

struct SeedCmd {
    BackendOpts backend;
    std::string corpus, corpus_format = "canonical", out;
    std::uint64_t budget = 100;
    int entity_types = 100, attributes = 10, names_per_letter = 100;
};

void register_corpus_options(CLI::App* c, std::string& corpus, std::string& format) {
    c->add_option("--corpus", corpus, "Intent-sequence corpus (default: bundled fixture)");
    c->add_option("--corpus-format", format, "Corpus layout")->check(CLI::IsMember({"canonical", "msdialog"}));
}

SeederOptions seeder_options(const SeedCmd& o) {
    SeederOptions s;
    s.entity_types = o.entity_types;
    s.attributes_per_type = o.attributes;
    s.names_per_letter = o.names_per_letter;
    s.max_parallel = parallelism(o.backend);
    s.intent_markers = markers_on(o.backend);
    s.params = params_of(o.backend);
    return s;
}

SeedBatch run_seeding(const SeedCmd& o, Client& client, RunManifest& m) {
    std::size_t dropped = 0;
    const SequenceCorpus corpus = load_sequence_corpus(o.corpus, o.corpus_format, dropped);
    if (!o.corpus.empty()) m.add_input(o.corpus);
    SeedBatch batch = build_seeds(client, corpus, o.budget, o.backend.rng_seed, seeder_options(o));
    m.counts()["seeds"] = batch.seeds.size();
    m.counts()["seed_failures"] = batch.failures.size();
    m.counts()["sequences_dropped"] = dropped;
    return batch;
}

int run_seed(const SeedCmd& o, std::ostream&) {
    auto client = make_client(o.backend);
    RunManifest m("seed");
    m.set_backend(client->identity());
    m.config() = backend_config(o.backend);
    m.config()["budget"] = o.budget;
    m.config()["entity_types"] = o.entity_types;
    m.config()["names_per_letter"] = o.names_per_letter;
    const SeedBatch batch = run_seeding(o, *client, m);
    write_seeds_jsonl(o.out, batch.seeds);
    finish(m, o.out);
    return kExitOk;
}

// ---- generate ------------------------------------------------------------

struct GenerateCmd {
    BackendOpts backend;
    std::string seeds, out, mode = "turnwise", cache_file;
    bool no_cache = false, rule_based_merge = false;
    int turn_attempts = 3;
};

GeneratorOptions generator_options(const BackendOpts& b, int attempts) {
    GeneratorOptions g;
    g.params = params_of(b);
    g.turn_attempts = attempts;
    g.intent_markers = markers_on(b);
    return g;
}

void log_failures(const DialogBatch& batch) {
    for (const DialogFailure& f : batch.failures) log::warn("dialog for " + f.seed_id + " failed: " + f.error);
}

int run_generate(const GenerateCmd& o, std::ostream&) {
    auto client = make_client(o.backend);
    RunManifest m("generate");
    m.set_backend(client->identity());
    m.config() = backend_config(o.backend);
    m.config()["mode"] = o.mode;
    m.config()["instruction_cache"] = !o.no_cache;
    m.config()["rule_based_merge"] = o.rule_based_merge;
    const std::vector<Seed> seeds = read_seeds_jsonl(o.seeds);
    m.add_input(o.seeds);

    InstructorOptions io;
    io.use_cache = !o.no_cache;
    io.rule_based_merge = o.rule_based_merge;
    Instructor instructor(*client, params_of(o.backend), io);
    if (!o.cache_file.empty() && io.use_cache) instructor.cache().load(o.cache_file);

    const GenerationMode mode = o.mode == "turnwise" ? GenerationMode::Turnwise : GenerationMode::SinglePass;
    const DialogBatch batch = generate_corpus(*client, instructor, seeds, mode,
                                              generator_options(o.backend, o.turn_attempts), parallelism(o.backend));
    log_failures(batch);
    write_dialogs_jsonl(o.out, batch.dialogs);
    if (!o.cache_file.empty() && io.use_cache) instructor.cache().save(o.cache_file);

    std::size_t mismatched = 0;
    for (const Dialog& d : batch.dialogs) mismatched += d.length_mismatch.value_or(false);
    m.counts()["generated"] = batch.dialogs.size();
    m.counts()["failed"] = batch.failures.size();
    m.counts()["length_mismatch"] = mismatched;
    finish(m, o.out);
    return batch.dialogs.empty() && !seeds.empty() ? kExitFailure : kExitOk;
}

// ---- build-dpo -----------------------------------------------------------

struct DpoCmd {
    std::string chosen, rejected, seeds, out;
    bool no_lmq = false, lowercase_prefix = false;
};

int run_build_dpo(const DpoCmd& o, std::ostream&) {
    RunManifest m("build-dpo");
    PairOptions po;
    po.use_lmq = !o.no_lmq;
    po.prefix_case = o.lowercase_prefix ? PrefixCase::Lower : PrefixCase::Capitalized;
    m.config()["use_lmq"] = po.use_lmq;
    m.config()["lowercase_prefix"] = o.lowercase_prefix;
    const auto seeds = read_seeds_jsonl(o.seeds);
    const auto chosen = read_dialogs_jsonl(o.chosen);
    const auto rejected = read_dialogs_jsonl(o.rejected);
    for (const std::string& p : {o.seeds, o.chosen, o.rejected}) m.add_input(p);
    const PairBuild pb = build_preference_pairs(seeds, chosen, rejected, po);
    write_pairs_jsonl(o.out, pb.pairs);
    m.counts()["pairs"] = pb.pairs.size();
    m.counts()["missing_chosen"] = pb.missing_chosen;
    m.counts()["missing_rejected"] = pb.missing_rejected;
    m.counts()["dropped_unrenderable"] = pb.dropped_unrenderable;
    finish(m, o.out);
    return kExitOk;
}

// ---- sample --------------------------------------------------------------

struct SampleCmd {
    BackendOpts backend;
    std::string strategy, human, synthetic, out, dedup = "id";
    std::size_t k = 15, min_count = 1000, tolerance = 1;
};

struct SampleOutcome {
    std::vector<Dialog> dialogs;
    Json counts = Json::object();
};

SampleOutcome sample_dialogs(const std::string& strategy, const std::vector<Dialog>& human,
                             const std::vector<Dialog>& synthetic, const SampleCmd& o, Client* client) {
    SampleOutcome out;
    Rng rng(splitmix64(o.backend.rng_seed ^ 0x5a3b1e));
    if (strategy == "bm25" || strategy == "embed") {
        const RetrievalResult r =
            retrieve_subset(human, synthetic, o.k, strategy == "bm25" ? RetrievalMethod::Bm25 : RetrievalMethod::Embed,
                            o.dedup == "content" ? DedupKey::Content : DedupKey::Id, client);
        out.dialogs = r.dialogs;
        out.counts["pre_dedup"] = r.pre_dedup;
        out.counts["post_dedup"] = r.post_dedup;
    } else if (strategy == "seqint-bal") {
        SeqIntBalResult r = seqint_bal(human, synthetic, o.min_count, rng);
        out.dialogs = std::move(r.sampled);
        Json sf = Json::array();
        for (const Shortfall& s : r.shortfalls) {
            sf.push_back({{"signature", s.signature}, {"human", s.human}, {"supply", s.supply}, {"reached", s.reached}});
        }
        out.counts["shortfall_signatures"] = r.shortfalls.size();
        out.counts["shortfalls"] = std::move(sf);
    } else if (strategy == "int-bal") {
        IntBalResult r = int_bal(human, synthetic, rng, o.tolerance);
        out.dialogs = std::move(r.sampled);
        out.counts["spread_before"] = intent_spread(r.before);
        out.counts["spread_after"] = intent_spread(r.after);
    } else {
        out.dialogs = random_eq(human, synthetic, rng);
    }
    out.counts["sampled"] = out.dialogs.size();
    return out;
}

int run_sample(const SampleCmd& o, std::ostream&) {
    RunManifest m("sample");
    m.config() = backend_config(o.backend);
    m.config()["strategy"] = o.strategy;
    m.config()["k"] = o.k;
    m.config()["min_count"] = o.min_count;
    m.config()["dedup"] = o.dedup;
    const std::vector<Dialog> human = load_optional_dialogs(o.human);
    const std::vector<Dialog> synthetic = load_dialogs(o.synthetic);
    if (!o.human.empty()) m.add_input(o.human);
    m.add_input(o.synthetic);
    if ((o.strategy == "bm25" || o.strategy == "embed") && o.human.empty()) {
        throw PreconditionError("retrieval strategies need --human as the query set");
    }
    std::unique_ptr<Client> client;
    if (o.strategy == "embed") {
        client = make_client(o.backend);
        m.set_backend(client->identity());
    }
    SampleOutcome s = sample_dialogs(o.strategy, human, synthetic, o, client.get());
    write_dialogs_jsonl(o.out, s.dialogs);
    m.counts() = std::move(s.counts);
    finish(m, o.out);
    return kExitOk;
}

// ---- train-ip / eval-ip / stats -----------------------------------------

struct TrainCmd {
    std::string train, model_out;
    TrainConfig config;
};

int run_train(const TrainCmd& o, std::ostream&) {
    RunManifest m("train-ip");
    const std::vector<Dialog> train = load_dialogs(o.train);
    m.add_input(o.train);
    const IPModel model = train_ip(train, o.config);
    save_model(o.model_out, model);
    m.config() = model_to_json(model).at("config");
    m.counts()["dialogs"] = train.size();
    m.counts()["vocabulary"] = model.features.dimension();
    m.counts()["final_loss"] = model.loss_history.back();
    finish(m, o.model_out);
    return kExitOk;
}

struct EvalCmd {
    std::string model, test, report, baseline_train;
};

int run_eval(const EvalCmd& o, std::ostream& out) {
    RunManifest m("eval-ip");
    const IPModel model = load_model(o.model);
    const std::vector<Dialog> test = load_dialogs(o.test);
    m.add_input(o.model);
    m.add_input(o.test);
    const MetricsReport r = evaluate_model(model, test);
    Json j = report_to_json(r);
    out << j.dump(2) << "\n";
    if (!o.baseline_train.empty()) {
        const IntentSet majority = majority_singleton(load_dialogs(o.baseline_train));
        std::vector<IntentSet> gold, pred;
        for (const LabeledUtterance& u : utterances_of(test)) {
            gold.push_back(u.intents);
            pred.push_back(majority);
        }
        m.counts()["baseline_f1_micro"] = evaluate(gold, pred).f1_micro;
    }
    if (!o.report.empty()) {
        write_text_file(o.report, j.dump(2) + "\n");
        m.counts()["samples"] = r.n_samples;
        finish(m, o.report);
    }
    return kExitOk;
}

int run_stats(const std::string& in, std::ostream& out) {
    out << stats_to_json(corpus_stats(load_dialogs(in))).dump(2) << "\n";
    return kExitOk;
}

// ---- filter-entities -----------------------------------------------------

struct FilterCmd {
    std::string seeds, out, mode = "fixture", fixture, endpoint = WikiClient::Options{}.endpoint;
    bool partition = false;
};

int run_filter(const FilterCmd& o, std::ostream&) {
    RunManifest m("filter-entities");
    m.config()["mode"] = o.mode;
    if (o.mode == "fixture" && o.fixture.empty()) throw PreconditionError("--mode fixture needs --fixture");
    WikiClient wiki = [&] {
        if (o.mode == "fixture") return WikiClient::fixture_file(o.fixture);
        WikiClient::Options w;
        w.endpoint = o.endpoint;
        return WikiClient::live(w);
    }();
    m.set_backend(wiki.is_live() ? "wikipedia:" + o.endpoint : "fixture:" + o.fixture);
    std::vector<Seed> seeds = read_seeds_jsonl(o.seeds);
    m.add_input(o.seeds);
    if (!o.fixture.empty()) m.add_input(o.fixture);
    const HallucinationPass pass = mark_hallucinated(wiki, std::move(seeds));
    write_seeds_jsonl(o.out, pass.seeds);
    m.counts()["seeds"] = pass.seeds.size();
    m.counts()["hallucinated"] = pass.hallucinated;
    m.counts()["check_failures"] = pass.failures;
    if (o.partition) {
        const SeedPartition p = partition_seeds(pass.seeds);
        const fs::path h = sibling(o.out, "hallucinated"), g = sibling(o.out, "grounded");
        write_seeds_jsonl(h, p.hallucinated);
        write_seeds_jsonl(g, p.grounded);
        m.add_output(h);
        m.add_output(g);
    }
    finish(m, o.out);
    return pass.failures == pass.seeds.size() && !pass.seeds.empty() ? kExitFailure : kExitOk;
}

// ---- pipeline ------------------------------------------------------------

struct PipelineCmd {
    SeedCmd seed;
    std::string out_dir = "solid-run", human, strategy = "seqint-bal", cache_file, wiki_fixture;
    std::size_t min_count = 1000, k = 15;
    bool no_lmq = false, lowercase_prefix = false;
    int turn_attempts = 3;
};

int run_pipeline(PipelineCmd o, std::ostream& out) {
    const BackendOpts& b = o.seed.backend;
    auto client = make_client(b);
    const fs::path dir = o.out_dir;
    fs::create_directories(dir);
    RunManifest m("pipeline");
    m.set_backend(client->identity());
    m.config() = backend_config(b);
    m.config()["budget"] = o.seed.budget;
    m.config()["strategy"] = o.strategy;
    m.config()["min_count"] = o.min_count;
    m.config()["use_lmq"] = !o.no_lmq;

    SeedBatch seeds = run_seeding(o.seed, *client, m);
    if (!o.wiki_fixture.empty()) {
        WikiClient wiki = WikiClient::fixture_file(o.wiki_fixture);
        m.add_input(o.wiki_fixture);
        HallucinationPass pass = mark_hallucinated(wiki, std::move(seeds.seeds));
        seeds.seeds = std::move(pass.seeds);
        m.counts()["hallucinated"] = pass.hallucinated;
    }
    const fs::path seeds_path = dir / "seeds.jsonl";
    write_seeds_jsonl(seeds_path, seeds.seeds);
    m.add_output(seeds_path);

    Instructor instructor(*client, params_of(b));
    if (!o.cache_file.empty()) instructor.cache().load(o.cache_file);
    const GeneratorOptions gen = generator_options(b, o.turn_attempts);
    const std::size_t workers = parallelism(b);
    const DialogBatch chosen = generate_corpus(*client, instructor, seeds.seeds, GenerationMode::Turnwise, gen, workers);
    const DialogBatch rejected =
        generate_corpus(*client, instructor, seeds.seeds, GenerationMode::SinglePass, gen, workers);
    log_failures(chosen);
    log_failures(rejected);
    if (!o.cache_file.empty()) instructor.cache().save(o.cache_file);
    const fs::path chosen_path = dir / "chosen.jsonl", rejected_path = dir / "rejected.jsonl";
    write_dialogs_jsonl(chosen_path, chosen.dialogs);
    write_dialogs_jsonl(rejected_path, rejected.dialogs);
    m.add_output(chosen_path);
    m.add_output(rejected_path);
    m.counts()["chosen"] = chosen.dialogs.size();
    m.counts()["chosen_failed"] = chosen.failures.size();
    m.counts()["rejected"] = rejected.dialogs.size();
    m.counts()["rejected_failed"] = rejected.failures.size();

    PairOptions po;
    po.use_lmq = !o.no_lmq;
    po.prefix_case = o.lowercase_prefix ? PrefixCase::Lower : PrefixCase::Capitalized;
    const PairBuild pairs = build_preference_pairs(seeds.seeds, chosen.dialogs, rejected.dialogs, po);
    const fs::path pairs_path = dir / "pairs.jsonl";
    write_pairs_jsonl(pairs_path, pairs.pairs);
    m.add_output(pairs_path);
    m.counts()["pairs"] = pairs.pairs.size();
    m.counts()["pairs_dropped"] = pairs.dropped_unrenderable + pairs.missing_chosen + pairs.missing_rejected;

    const std::vector<Dialog> human = load_optional_dialogs(o.human);
    if (!o.human.empty()) m.add_input(o.human);
    SampleCmd sc;
    sc.backend = b;
    sc.min_count = o.min_count;
    sc.k = o.k;
    SampleOutcome sampled = sample_dialogs(o.strategy, human, chosen.dialogs, sc, client.get());
    const fs::path sample_path = dir / "sample.jsonl";
    write_dialogs_jsonl(sample_path, sampled.dialogs);
    m.add_output(sample_path);
    m.counts()["sample"] = std::move(sampled.counts);

    const fs::path stats_path = dir / "stats.json";
    Json stats = stats_to_json(corpus_stats(chosen.dialogs));
    write_text_file(stats_path, stats.dump(2) + "\n");
    m.add_output(stats_path);
    m.write(dir / "pipeline.manifest.json");
    out << stats.dump(2) << "\n";
    return chosen.dialogs.empty() ? kExitFailure : kExitOk;
}

void set_log_level(const std::string& level) {
    static const std::map<std::string, log::Level> kLevels = {
        {"debug", log::Level::Debug}, {"info", log::Level::Info}, {"warn", log::Level::Warn},
        {"error", log::Level::Error}, {"off", log::Level::Off},
    };
    log::set_level(kLevels.at(level));
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic intent-aware dialog generation, sampling and intent prediction", "solid"};
    app.set_config("--config", "", "key=value config file; flags override it");
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "Diagnostics on stderr")
        ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));
    app.require_subcommand(1, 1);
    // Global options such as --log-level may also follow the subcommand.
    app.fallthrough();

    SeedCmd seed;
    auto* c_seed = app.add_subcommand("seed", "Generate seeds (entity, background, starter, intent sequence)");
    add_backend_options(c_seed, seed.backend);
    register_corpus_options(c_seed, seed.corpus, seed.corpus_format);
    c_seed->add_option("--budget", seed.budget, "Number of seeds")->check(CLI::PositiveNumber);
    c_seed->add_option("--out", seed.out, "Seeds JSON lines")->required();
    c_seed->add_option("--entity-types", seed.entity_types, "Entity types to request")->check(CLI::PositiveNumber);
    c_seed->add_option("--attributes", seed.attributes, "Attributes per entity type")->check(CLI::PositiveNumber);
    c_seed->add_option("--names-per-letter", seed.names_per_letter, "Names per type and letter")
        ->check(CLI::PositiveNumber);

    GenerateCmd gen;
    auto* c_gen = app.add_subcommand("generate", "Generate dialogs from seeds");
    add_backend_options(c_gen, gen.backend);
    c_gen->add_option("--seeds", gen.seeds, "Seeds JSON lines")->required()->check(CLI::ExistingFile);
    c_gen->add_option("--out", gen.out, "Dialogs JSON lines")->required();
    c_gen->add_option("--mode", gen.mode, "Generation mode")->check(CLI::IsMember({"turnwise", "singlepass"}));
    c_gen->add_option("--instruction-cache", gen.cache_file, "Merged-instruction sidecar to load and save");
    c_gen->add_flag("--no-instruction-cache", gen.no_cache, "Merge instructions afresh for every turn");
    c_gen->add_flag("--rule-based-merge", gen.rule_based_merge, "Join instructions with 'and' instead of merging");
    c_gen->add_option("--turn-attempts", gen.turn_attempts, "Completions per turn")->check(CLI::Range(1, 10));

    DpoCmd dpo;
    auto* c_dpo = app.add_subcommand("build-dpo", "Join chosen and rejected dialogs into preference pairs");
    c_dpo->add_option("--chosen", dpo.chosen, "Turn-wise dialogs")->required()->check(CLI::ExistingFile);
    c_dpo->add_option("--rejected", dpo.rejected, "Single-pass dialogs")->required()->check(CLI::ExistingFile);
    c_dpo->add_option("--seeds", dpo.seeds, "Seeds JSON lines")->required()->check(CLI::ExistingFile);
    c_dpo->add_option("--out", dpo.out, "Pairs JSON lines")->required();
    c_dpo->add_flag("--no-lmq", dpo.no_lmq, "Omit the length-based quality prefix");
    c_dpo->add_flag("--lowercase-prefix", dpo.lowercase_prefix, "Write the quality prefix in lower case");

    SampleCmd sample;
    auto* c_sample = app.add_subcommand("sample", "Build a training subset");
    add_backend_options(c_sample, sample.backend);
    c_sample->add_option("--strategy", sample.strategy, "Sampling strategy")
        ->required()
        ->check(CLI::IsMember({"bm25", "embed", "seqint-bal", "int-bal", "random-eq"}));
    c_sample->add_option("--human", sample.human, "Human dialogs (queries for retrieval)")->check(CLI::ExistingFile);
    c_sample->add_option("--synthetic", sample.synthetic, "Synthetic dialogs")->required()->check(CLI::ExistingFile);
    c_sample->add_option("--out", sample.out, "Sampled dialogs")->required();
    c_sample->add_option("--k", sample.k, "Dialogs retrieved per query")->check(CLI::PositiveNumber);
    c_sample->add_option("--min-count", sample.min_count, "SeqInt-Bal floor per sequence")->check(CLI::PositiveNumber);
    c_sample->add_option("--tolerance", sample.tolerance, "Int-Bal tolerance");
    c_sample->add_option("--dedup", sample.dedup, "Duplicate key")->check(CLI::IsMember({"id", "content"}));

    TrainCmd train;
    auto* c_train = app.add_subcommand("train-ip", "Train the intent predictor");
    c_train->add_option("--train", train.train, "Training dialogs")->required()->check(CLI::ExistingFile);
    c_train->add_option("--model-out", train.model_out, "Model JSON")->required();
    c_train->add_option("--epochs", train.config.epochs, "Epochs")->check(CLI::NonNegativeNumber);
    c_train->add_option("--learning-rate", train.config.learning_rate, "Step size");
    c_train->add_option("--l2", train.config.l2, "L2 strength");
    c_train->add_option("--batch-size", train.config.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    c_train->add_option("--threshold", train.config.threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
    c_train->add_option("--rng-seed", train.config.rng_seed, "Shuffle seed");

    EvalCmd eval;
    auto* c_eval = app.add_subcommand("eval-ip", "Evaluate the intent predictor");
    c_eval->add_option("--model", eval.model, "Model JSON")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--test", eval.test, "Test dialogs")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--report", eval.report, "Metrics report JSON");
    c_eval->add_option("--baseline-train", eval.baseline_train, "Also score the majority baseline of these dialogs")
        ->check(CLI::ExistingFile);

    std::string stats_in;
    auto* c_stats = app.add_subcommand("stats", "Corpus statistics as JSON on stdout");
    c_stats->add_option("--in", stats_in, "Dialogs")->required()->check(CLI::ExistingFile);

    FilterCmd filter;
    auto* c_filter = app.add_subcommand("filter-entities", "Flag seeds whose entity cannot be found");
    c_filter->add_option("--seeds", filter.seeds, "Seeds JSON lines")->required()->check(CLI::ExistingFile);
    c_filter->add_option("--out", filter.out, "Flagged seeds")->required();
    c_filter->add_option("--mode", filter.mode, "Lookup mode")->check(CLI::IsMember({"live", "fixture"}));
    c_filter->add_option("--fixture", filter.fixture, "JSON object of title -> exists")->check(CLI::ExistingFile);
    c_filter->add_option("--endpoint", filter.endpoint, "Search API URL for live mode");
    c_filter->add_flag("--partition", filter.partition, "Also write .hallucinated and .grounded files");

    PipelineCmd pipe;
    auto* c_pipe = app.add_subcommand("pipeline", "seed -> generate -> build pairs -> sample -> stats");
    add_backend_options(c_pipe, pipe.seed.backend);
    register_corpus_options(c_pipe, pipe.seed.corpus, pipe.seed.corpus_format);
    pipe.seed.budget = 50;
    c_pipe->add_option("--budget", pipe.seed.budget, "Number of seeds")->check(CLI::PositiveNumber);
    c_pipe->add_option("--entity-types", pipe.seed.entity_types, "Entity types to request")->check(CLI::PositiveNumber);
    c_pipe->add_option("--names-per-letter", pipe.seed.names_per_letter, "Names per type and letter")
        ->check(CLI::PositiveNumber);
    c_pipe->add_option("--out-dir", pipe.out_dir, "Output directory");
    c_pipe->add_option("--human", pipe.human, "Human dialogs for sampling")->check(CLI::ExistingFile);
    c_pipe->add_option("--strategy", pipe.strategy, "Mixing strategy")
        ->check(CLI::IsMember({"seqint-bal", "int-bal", "random-eq"}));
    c_pipe->add_option("--min-count", pipe.min_count, "SeqInt-Bal floor per sequence")->check(CLI::PositiveNumber);
    c_pipe->add_option("--instruction-cache", pipe.cache_file, "Merged-instruction sidecar");
    c_pipe->add_option("--wiki-fixture", pipe.wiki_fixture, "Flag hallucinated entities from this fixture")
        ->check(CLI::ExistingFile);
    c_pipe->add_flag("--no-lmq", pipe.no_lmq, "Omit the length-based quality prefix");
    c_pipe->add_flag("--lowercase-prefix", pipe.lowercase_prefix, "Write the quality prefix in lower case");

    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("solid");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (std::string& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        if (!dynamic_cast<const CLI::RequiredError*>(&e) || app.get_subcommands().empty()) err << app.help();
        return kExitUsage;
    }

    set_log_level(log_level);
    try {
        if (*c_seed) return run_seed(seed, out);
        if (*c_gen) return run_generate(gen, out);
        if (*c_dpo) return run_build_dpo(dpo, out);
        if (*c_sample) return run_sample(sample, out);
        if (*c_train) return run_train(train, out);
        if (*c_eval) return run_eval(eval, out);
        if (*c_stats) return run_stats(stats_in, out);
        if (*c_filter) return run_filter(filter, out);
        if (*c_pipe) return run_pipeline(pipe, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    err << app.help();
    return kExitUsage;
}

int dispatch(const std::vector<std::string>& args) { return dispatch(args, std::cout, std::cerr); }

}  // namespace solid::cli
