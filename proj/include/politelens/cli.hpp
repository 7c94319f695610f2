#ifndef POLITELENS_CLI_HPP
#define POLITELENS_CLI_HPP

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "politelens/baseline.hpp"
#include "politelens/common.hpp"
#include "politelens/corpus.hpp"
#include "politelens/embed.hpp"
#include "politelens/interpret.hpp"
#include "politelens/strategy.hpp"
#include "politelens/train.hpp"

namespace politelens::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Config file: flat key=value lines, '#' comments. CLI flags override file
// values; POLITELENS_SEED overrides the config seed (but not an explicit
// --seed flag).

inline void apply_config_line(train::TrainConfig& cfg, const std::string& key,
                              const std::string& value) {
    try {
        if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "batch_size") cfg.batch_size = std::stoull(value);
        else if (key == "learning_rate") cfg.learning_rate = std::stod(value);
        else if (key == "dropout") cfg.dropout = std::stod(value);
        else if (key == "max_epochs") cfg.max_epochs = std::stoull(value);
        else if (key == "patience") cfg.patience = std::stoull(value);
        else if (key == "embedding_dim") cfg.dims.embedding_dim = std::stoull(value);
        else if (key == "feature_maps") cfg.dims.feature_maps = std::stoull(value);
        else if (key == "max_len") cfg.max_len = std::stoull(value);
        else if (key == "threads") cfg.threads = std::stoull(value);
        else if (key == "adam_beta1") cfg.adam_beta1 = std::stod(value);
        else if (key == "adam_beta2") cfg.adam_beta2 = std::stod(value);
        else if (key == "adam_epsilon") cfg.adam_epsilon = std::stod(value);
        else if (key == "windows") {
            cfg.dims.windows.clear();
            std::string item;
            std::istringstream ss(value);
            while (std::getline(ss, item, ','))
                cfg.dims.windows.push_back(std::stoull(trim(item)));
            if (cfg.dims.windows.empty()) throw UsageError("windows list is empty");
        } else {
            throw UsageError("unknown config key: " + key);
        }
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("bad value for config key " + key + ": '" + value + "'");
    }
}

inline void load_config_file(train::TrainConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        auto text = trim(line);
        if (text.empty()) continue;
        auto eq = text.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        apply_config_line(cfg, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }
}

// ---------------------------------------------------------------------------
// Run manifest: one JSON file per run, written next to the outputs.

struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;

    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    std::string started_utc;

    RunManifest(std::string cmd, std::uint64_t run_seed) : command(std::move(cmd)), seed(run_seed) {
        auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        started_utc = buf;
    }

    void write_next_to(const std::string& primary_output) const {
        auto dir = std::filesystem::path(primary_output).parent_path();
        write((dir.empty() ? std::filesystem::path(".") : dir) /
              (command + ".manifest.json"));
    }

    void write(const std::filesystem::path& path) const {
        nlohmann::json j;
        j["command"] = command;
        j["version"] = kToolVersion;
        j["seed"] = seed;
        j["config"] = config;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        j["started_utc"] = started_utc;
        j["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ofstream out(path);
        if (!out) throw DataError("cannot write manifest: " + path.string());
        out << j.dump(2) << '\n';
    }
};

namespace detail {

inline std::uint64_t resolve_seed(std::uint64_t config_seed, bool flag_given,
                                  std::uint64_t flag_seed) {
    if (flag_given) return flag_seed;
    if (const char* env = std::getenv("POLITELENS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("bad POLITELENS_SEED value: ") + env);
        }
    }
    return config_seed;
}

inline std::map<std::string, std::string> config_map(const train::TrainConfig& cfg) {
    std::map<std::string, std::string> m;
    m["batch_size"] = std::to_string(cfg.batch_size);
    m["learning_rate"] = format_fixed(cfg.learning_rate, 6);
    m["dropout"] = format_fixed(cfg.dropout, 3);
    m["max_epochs"] = std::to_string(cfg.max_epochs);
    m["patience"] = std::to_string(cfg.patience);
    m["seed"] = std::to_string(cfg.seed);
    m["embedding_dim"] = std::to_string(cfg.dims.embedding_dim);
    m["feature_maps"] = std::to_string(cfg.dims.feature_maps);
    std::string windows;
    for (std::size_t w : cfg.dims.windows) windows += (windows.empty() ? "" : ",") + std::to_string(w);
    m["windows"] = windows;
    m["max_len"] = std::to_string(cfg.max_len);
    m["threads"] = std::to_string(cfg.threads);
    return m;
}

inline bool looks_like_csv(const std::string& path) {
    if (path.size() >= 4 && lower_ascii(path.substr(path.size() - 4)) == ".csv") return true;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty()) continue;
        return t[0] != '{';
    }
    return false;
}

inline std::vector<corpus::Request> load_any_corpus(const std::string& path,
                                                    corpus::Community community) {
    return looks_like_csv(path) ? corpus::load_corpus_csv(path, community)
                                : corpus::load_corpus(path, community);
}

inline void check_vocab_against_data(const train::Checkpoint& ckpt, const std::string& data_file) {
    auto vocab_path = std::filesystem::path(data_file).parent_path() / "vocab.tsv";
    if (!std::filesystem::exists(vocab_path)) return;
    auto vocab = corpus::Vocabulary::load_tsv(vocab_path.string());
    if (vocab.hash() != ckpt.vocab_hash)
        throw DataError("vocabulary hash mismatch: model was trained with a different " +
                        std::string("vocabulary than ") + vocab_path.string());
}

inline baseline::Lexicons lexicons_from(const std::string& dir) {
    if (!dir.empty()) {
        if (!std::filesystem::is_directory(dir))
            throw DataError("lexicon directory not found: " + dir);
        return baseline::Lexicons::load_dir(dir);
    }
    if (std::filesystem::is_directory("lexicons")) return baseline::Lexicons::load_dir("lexicons");
    return baseline::Lexicons::builtin();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline int run_prepare(const std::string& input, const std::string& community_name,
                       const std::string& outdir, std::uint64_t seed) {
    RunManifest manifest("prepare", seed);
    manifest.inputs = {input};
    manifest.config["community"] = community_name;

    corpus::Community community;
    if (community_name == "wiki") community = corpus::Community::Wiki;
    else if (community_name == "se") community = corpus::Community::SE;
    else throw UsageError("community must be wiki or se, got '" + community_name + "'");

    auto requests = detail::load_any_corpus(input, community);
    std::cout << "loaded " << requests.size() << " requests from " << input << '\n';
    auto labeled = corpus::label_examples(requests);
    std::cout << "labeled examples: " << labeled.size() << '\n';

    corpus::SplitSpec spec;
    spec.seed = seed;
    auto splits = corpus::make_splits(labeled, spec);
    auto vocab = corpus::Vocabulary::build(splits.train);

    std::filesystem::create_directories(outdir);
    auto path = [&](const char* name) { return (std::filesystem::path(outdir) / name).string(); };
    corpus::save_examples(path("train.jsonl"), splits.train);
    corpus::save_examples(path("dev.jsonl"), splits.dev);
    corpus::save_examples(path("test.jsonl"), splits.test);
    vocab.save_tsv(path("vocab.tsv"));
    std::cout << "split sizes: train " << splits.train.size() << ", dev " << splits.dev.size()
              << ", test " << splits.test.size() << "; vocabulary " << vocab.size() << " entries\n";

    manifest.outputs = {path("train.jsonl"), path("dev.jsonl"), path("test.jsonl"),
                        path("vocab.tsv")};
    manifest.write_next_to(path("train.jsonl"));
    return 0;
}

inline int run_train(const std::string& data_dir, const train::TrainConfig& cfg,
                     const std::string& out_path, const std::string& embeddings_path) {
    RunManifest manifest("train", cfg.seed);
    manifest.config = detail::config_map(cfg);

    auto path = [&](const char* name) { return (std::filesystem::path(data_dir) / name).string(); };
    auto train_set = corpus::load_examples(path("train.jsonl"));
    auto dev_set = corpus::load_examples(path("dev.jsonl"));
    auto vocab = corpus::Vocabulary::load_tsv(path("vocab.tsv"));
    manifest.inputs = {path("train.jsonl"), path("dev.jsonl"), path("vocab.tsv")};

    embed::EmbeddingTable table;
    if (embeddings_path.empty()) {
        table = embed::init_random(vocab, cfg.dims.embedding_dim, cfg.seed);
        std::cout << "no pretrained vectors given; using uniform unit-scaling init\n";
    } else {
        table = embed::load_pretrained(embeddings_path, vocab, cfg.dims.embedding_dim, cfg.seed);
        manifest.inputs.push_back(embeddings_path);
    }

    auto ckpt = train::train(train_set, dev_set, vocab, std::move(table), cfg, &std::cout);
    train::save_checkpoint(ckpt, out_path);
    std::cout << "best dev accuracy " << format_fixed(ckpt.dev_accuracy, 4) << " at epoch "
              << ckpt.epoch << "; checkpoint written to " << out_path << '\n';

    manifest.outputs = {out_path};
    manifest.write_next_to(out_path);
    return 0;
}

inline int run_eval(const std::string& model_path, const std::string& data_file,
                    const std::string& out_path) {
    auto ckpt = train::load_checkpoint(model_path);
    RunManifest manifest("eval", ckpt.config.seed);
    manifest.inputs = {model_path, data_file};
    detail::check_vocab_against_data(ckpt, data_file);
    auto dataset = corpus::load_examples(data_file);
    auto result = train::evaluate(ckpt, dataset);
    train::save_predictions(out_path, result);
    std::cout << "accuracy " << format_fixed(result.accuracy, 4) << " on " << dataset.size()
              << " examples; predictions written to " << out_path << '\n';
    manifest.outputs = {out_path};
    manifest.config["model"] = model_path;
    manifest.write_next_to(out_path);
    return 0;
}

inline int run_baseline(const std::string& kind, const std::string& data_dir,
                        const std::string& lexicon_dir, const std::string& dump_path,
                        const std::string& out_path) {
    if (kind != "bow" && kind != "ling" && kind != "ling+disc")
        throw UsageError("baseline kind must be bow, ling or ling+disc, got '" + kind + "'");
    RunManifest manifest("baseline", 0);
    manifest.config["kind"] = kind;

    auto path = [&](const char* name) { return (std::filesystem::path(data_dir) / name).string(); };
    auto train_set = corpus::load_examples(path("train.jsonl"));
    auto dev_set = corpus::load_examples(path("dev.jsonl"));
    auto test_set = corpus::load_examples(path("test.jsonl"));
    manifest.inputs = {path("train.jsonl"), path("dev.jsonl"), path("test.jsonl")};

    std::vector<std::string> names;
    std::function<baseline::FeatureVector(const corpus::LabeledExample&)> extract;

    corpus::Vocabulary vocab;
    baseline::StrategyCatalog catalog;
    auto lex = detail::lexicons_from(lexicon_dir);
    if (kind == "bow") {
        vocab = corpus::Vocabulary::load_tsv(path("vocab.tsv"));
        for (std::size_t i = 2; i < vocab.size(); ++i)
            names.push_back(vocab.token_of(static_cast<int>(i)));
        extract = [&vocab](const corpus::LabeledExample& ex) {
            return baseline::bow_features(ex, vocab);
        };
    } else if (kind == "ling") {
        catalog = baseline::StrategyCatalog::linguistic(lex);
        names = catalog.names();
        extract = [&catalog](const corpus::LabeledExample& ex) {
            return baseline::linguistic_features(ex, catalog);
        };
    } else if (kind == "ling+disc") {
        catalog = baseline::StrategyCatalog::linguistic(lex).augment_and_correct(lex);
        names = catalog.names();
        extract = [&catalog](const corpus::LabeledExample& ex) {
            return baseline::linguistic_features(ex, catalog);
        };
    } else {
        throw UsageError("baseline kind must be bow, ling or ling+disc, got '" + kind + "'");
    }

    auto features_of = [&](const std::vector<corpus::LabeledExample>& examples) {
        std::vector<baseline::FeatureVector> x;
        std::vector<corpus::Label> y;
        for (const auto& ex : examples) {
            x.push_back(extract(ex));
            y.push_back(ex.label);
        }
        return std::make_pair(std::move(x), std::move(y));
    };
    auto [train_x, train_y] = features_of(train_set);
    auto [dev_x, dev_y] = features_of(dev_set);
    auto [test_x, test_y] = features_of(test_set);

    auto model = baseline::train_linear(train_x, train_y, dev_x, dev_y);
    double test_acc = baseline::linear_accuracy(model, test_x, test_y);
    std::cout << "baseline " << kind << ": test accuracy " << format_fixed(test_acc, 4)
              << " (l2 " << format_fixed(model.l2, 2) << ", dev-selected)\n";

    train::EvalResult result;
    result.accuracy = test_acc;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        double s = model.score(test_x[i]);
        result.predictions.push_back({test_set[i].source_id, test_y[i], model.predict(test_x[i]),
                                      1.0 / (1.0 + std::exp(-s))});
    }
    train::save_predictions(out_path, result);
    manifest.outputs = {out_path};

    if (!dump_path.empty()) {
        std::vector<std::string> ids;
        for (const auto& ex : test_set) ids.push_back(ex.source_id);
        baseline::dump_features(dump_path, names, ids, test_x);
        manifest.outputs.push_back(dump_path);
    }
    manifest.write_next_to(out_path);
    return 0;
}

inline int run_clusters(const std::string& model_path, const std::string& data_file, std::size_t k,
                        const std::string& out_path) {
    auto ckpt = train::load_checkpoint(model_path);
    RunManifest manifest("clusters", ckpt.config.seed);
    manifest.inputs = {model_path, data_file};
    manifest.config["k"] = std::to_string(k);
    detail::check_vocab_against_data(ckpt, data_file);
    auto dataset = corpus::load_examples(data_file);
    auto clusters = interpret::collect_clusters(ckpt, dataset, k);
    interpret::render_clusters(clusters, out_path);
    std::cout << clusters.size() << " neuron clusters written to " << out_path << '\n';
    manifest.outputs = {out_path};
    manifest.write_next_to(out_path);
    return 0;
}

inline int run_saliency(const std::string& model_path, const std::string& request_id,
                        const std::string& data_file, const std::string& text,
                        const std::string& label_override, const std::string& outdir) {
    if (text.empty() == request_id.empty())
        throw UsageError("saliency: give exactly one of --id (with --data) or --text");
    auto ckpt = train::load_checkpoint(model_path);
    RunManifest manifest("saliency", ckpt.config.seed);
    manifest.inputs = {model_path};

    corpus::LabeledExample ex;
    if (!request_id.empty()) {
        if (data_file.empty()) throw UsageError("saliency --id needs --data to find the request");
        manifest.inputs.push_back(data_file);
        auto dataset = corpus::load_examples(data_file);
        bool found = false;
        for (const auto& candidate : dataset)
            if (candidate.source_id == request_id) {
                ex = candidate;
                found = true;
                break;
            }
        if (!found) throw DataError("request id not found in " + data_file + ": " + request_id);
    } else {
        ex.text = text;
        ex.tokens = corpus::tokenize(text);
        if (ex.tokens.empty()) throw DataError("saliency: text tokenizes to nothing");
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "text-%08llx",
                      static_cast<unsigned long long>(fnv1a64(text) & 0xffffffffULL));
        ex.source_id = idbuf;
        // without a gold label, explain the model's own decision
        auto probe = train::evaluate(ckpt, {ex});
        ex.label = probe.predictions[0].predicted;
    }
    if (!label_override.empty()) ex.label = corpus::parse_label(label_override);
    manifest.config["label"] = corpus::label_name(ex.label);

    auto map = interpret::saliency(ckpt, ex);
    interpret::render_saliency(map, outdir);
    auto base = (std::filesystem::path(outdir) / map.request_id).string();
    std::cout << "saliency for " << map.request_id << " (true " << corpus::label_name(map.true_label)
              << ", predicted " << corpus::label_name(map.predicted) << ") written to " << base
              << ".{html,tsv,matrix.tsv}\n";
    manifest.outputs = {base + ".html", base + ".tsv", base + ".matrix.tsv"};
    manifest.write_next_to(base + ".html");
    return 0;
}

inline int run_trajectory(const std::string& model_path, const std::string& words_arg,
                          const std::string& fit_on, const std::string& svg_path,
                          const std::string& tsv_path) {
    auto ckpt = train::load_checkpoint(model_path);
    RunManifest manifest("trajectory", ckpt.config.seed);
    manifest.inputs = {model_path};
    manifest.config["fit_on"] = fit_on;
    manifest.config["words"] = words_arg;

    std::vector<std::string> words;
    if (words_arg == "default") {
        words = interpret::default_trajectory_words();
    } else {
        std::ifstream in(words_arg);
        if (!in) throw DataError("cannot open word list: " + words_arg);
        std::string line;
        while (std::getline(in, line)) {
            auto w = trim(line);
            if (!w.empty() && w[0] != '#') words.push_back(lower_ascii(w));
        }
        manifest.inputs.push_back(words_arg);
    }

    auto plot = interpret::trajectory(ckpt, words, fit_on);
    interpret::render_trajectory(plot, svg_path, tsv_path);
    std::cout << words.size() << " word trajectories written to " << svg_path << " and " << tsv_path
              << " (components explain " << format_fixed(plot.pca.explained1 * 100, 1) << "% + "
              << format_fixed(plot.pca.explained2 * 100, 1) << "% of variance)\n";
    manifest.outputs = {svg_path, tsv_path};
    manifest.write_next_to(tsv_path);
    return 0;
}

inline int run_strategies(const std::string& data_file, const std::string& lexicon_dir,
                          const std::string& out_path) {
    RunManifest manifest("strategies", 0);
    manifest.inputs = {data_file};
    auto requests = detail::load_any_corpus(data_file, corpus::Community::Wiki);
    auto lex = detail::lexicons_from(lexicon_dir);
    auto matchers = baseline::linguistic_matchers(lex);
    for (auto& m : baseline::discovered_matchers(lex)) matchers.push_back(std::move(m));
    auto rows = strategy::strategy_report(requests, matchers);
    strategy::save_report_tsv(out_path, rows);
    std::cout << rows.size() << " strategy rows written to " << out_path << '\n';
    manifest.outputs = {out_path};
    manifest.write_next_to(out_path);
    return 0;
}

// ---------------------------------------------------------------------------
// Dispatch

inline int dispatch(int argc, const char* const* argv) {
    CLI::App app{"politeness prediction and interpretation toolkit"};
    app.require_subcommand(1);

    // prepare
    auto* prepare = app.add_subcommand("prepare", "convert, label and split a request corpus");
    std::string prep_input, prep_outdir = "data", prep_community = "wiki";
    std::uint64_t prep_seed = 7;
    bool prep_seed_given = false;
    prepare->add_option("--input", prep_input, "corpus file (.jsonl or original .csv)")
        ->required();
    prepare->add_option("--outdir", prep_outdir, "output directory");
    prepare->add_option("--community", prep_community, "wiki or se");
    prepare->add_option("--seed", prep_seed, "shuffle seed")->each([&](const std::string&) {
        prep_seed_given = true;
    });

    // train
    auto* train_cmd = app.add_subcommand("train", "train the convolutional classifier");
    std::string train_data, train_out = "model.ckpt", train_config_path, train_embeddings;
    train::TrainConfig cfg;
    std::uint64_t train_seed = cfg.seed;
    bool train_seed_given = false;
    train_cmd->add_option("--data", train_data, "directory produced by prepare")->required();
    train_cmd->add_option("--config", train_config_path, "key=value config file");
    train_cmd->add_option("--out", train_out, "checkpoint path");
    train_cmd->add_option("--embeddings", train_embeddings, "pretrained word vector file");
    train_cmd->add_option("--seed", train_seed, "training seed")->each([&](const std::string&) {
        train_seed_given = true;
    });
    std::uint64_t train_epochs = 0, train_threads = 0, train_patience = 0;
    bool epochs_given = false, threads_given = false, patience_given = false;
    train_cmd->add_option("--max-epochs", train_epochs, "epoch budget")
        ->each([&](const std::string&) { epochs_given = true; });
    train_cmd->add_option("--patience", train_patience, "early-stop patience in epochs")
        ->each([&](const std::string&) { patience_given = true; });
    train_cmd->add_option("--threads", train_threads, "per-batch gradient workers")
        ->each([&](const std::string&) { threads_given = true; });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split file");
    std::string eval_model, eval_data, eval_out = "predictions.tsv";
    eval_cmd->add_option("--model", eval_model)->required();
    eval_cmd->add_option("--data", eval_data, "jsonl split file")->required();
    eval_cmd->add_option("--out", eval_out, "predictions TSV path");

    // baseline
    auto* baseline_cmd = app.add_subcommand("baseline", "featurized baselines");
    std::string base_kind, base_data, base_lexicons, base_dump, base_out = "baseline_predictions.tsv";
    baseline_cmd->add_option("--kind", base_kind, "bow, ling or ling+disc")->required();
    baseline_cmd->add_option("--data", base_data, "directory produced by prepare")->required();
    baseline_cmd->add_option("--lexicons", base_lexicons, "lexicon directory");
    baseline_cmd->add_option("--dump-features", base_dump, "write feature TSV here");
    baseline_cmd->add_option("--out", base_out, "predictions TSV path");

    // clusters
    auto* clusters_cmd = app.add_subcommand("clusters", "top-k activation clusters per neuron");
    std::string clu_model, clu_data, clu_out = "clusters.tsv";
    std::size_t clu_k = 10;
    clusters_cmd->add_option("--model", clu_model)->required();
    clusters_cmd->add_option("--data", clu_data, "jsonl split file")->required();
    clusters_cmd->add_option("--k", clu_k, "entries per neuron");
    clusters_cmd->add_option("--out", clu_out);

    // saliency
    auto* saliency_cmd = app.add_subcommand("saliency", "first-derivative saliency for one request");
    std::string sal_model, sal_id, sal_data, sal_text, sal_label, sal_outdir = "saliency";
    saliency_cmd->add_option("--model", sal_model)->required();
    saliency_cmd->add_option("--id", sal_id, "request id (requires --data)");
    saliency_cmd->add_option("--data", sal_data, "jsonl split file");
    saliency_cmd->add_option("--text", sal_text, "raw request text");
    saliency_cmd->add_option("--label", sal_label, "polite|impolite gradient label");
    saliency_cmd->add_option("--outdir", sal_outdir);

    // trajectory
    auto* traj_cmd = app.add_subcommand("trajectory", "embedding positions before/after training");
    std::string traj_model, traj_words = "default", traj_fit = "before",
                traj_svg = "trajectory.svg", traj_tsv = "trajectory.tsv";
    traj_cmd->add_option("--model", traj_model)->required();
    traj_cmd->add_option("--words", traj_words, "'default' or a word-list file");
    traj_cmd->add_option("--fit-on", traj_fit, "before|after|both");
    traj_cmd->add_option("--svg", traj_svg);
    traj_cmd->add_option("--tsv", traj_tsv);

    // strategies
    auto* strat_cmd = app.add_subcommand("strategies", "per-strategy politeness statistics");
    std::string strat_data, strat_lexicons, strat_out = "strategies.tsv";
    strat_cmd->add_option("--data", strat_data, "scored corpus file")->required();
    strat_cmd->add_option("--lexicons", strat_lexicons, "lexicon directory");
    strat_cmd->add_option("--out", strat_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            std::cout << app.help();
            return 0;
        }
        std::cerr << e.what() << '\n' << app.help();
        return 1;
    }

    try {
        if (app.got_subcommand(prepare)) {
            return run_prepare(prep_input, prep_community, prep_outdir,
                               detail::resolve_seed(prep_seed, prep_seed_given, prep_seed));
        }
        if (app.got_subcommand(train_cmd)) {
            if (!train_config_path.empty()) load_config_file(cfg, train_config_path);
            cfg.seed = detail::resolve_seed(cfg.seed, train_seed_given, train_seed);
            if (epochs_given) cfg.max_epochs = train_epochs;
            if (patience_given) cfg.patience = train_patience;
            if (threads_given) cfg.threads = train_threads;
            return run_train(train_data, cfg, train_out, train_embeddings);
        }
        if (app.got_subcommand(eval_cmd)) return run_eval(eval_model, eval_data, eval_out);
        if (app.got_subcommand(baseline_cmd))
            return run_baseline(base_kind, base_data, base_lexicons, base_dump, base_out);
        if (app.got_subcommand(clusters_cmd))
            return run_clusters(clu_model, clu_data, clu_k, clu_out);
        if (app.got_subcommand(saliency_cmd))
            return run_saliency(sal_model, sal_id, sal_data, sal_text, sal_label, sal_outdir);
        if (app.got_subcommand(traj_cmd))
            return run_trajectory(traj_model, traj_words, traj_fit, traj_svg, traj_tsv);
        if (app.got_subcommand(strat_cmd))
            return run_strategies(strat_data, strat_lexicons, strat_out);
        std::cerr << app.help();
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

inline int dispatch(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("politelens");
    for (const auto& a : args) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace politelens::cli

#endif  // POLITELENS_CLI_HPP
