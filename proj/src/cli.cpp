#include "lacr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "lacr/errors.hpp"
#include "lacr/io.hpp"
#include "lacr/pipeline.hpp"
#include "lacr/synth.hpp"

namespace lacr {

namespace {

struct Options {
    std::string config;
    std::string dataset;
    std::string mists;
    std::string embeddings;
    std::size_t hash_dim = 0;
    std::string checkpoint;
    std::string model;
    std::size_t acs_depth = 32;
    std::optional<double> threshold;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    unsigned jobs = 1;
    bool deterministic = false;
    bool undefined_as_nostance = false;
    std::string thresholds;
    std::string predictions;
    std::string split = "test";
    std::string report;
    std::string csv;

    double separation = 5.0;
    std::size_t tweets = 200;
    std::size_t num_mists = 4;
    std::size_t dim = SynthParams{}.dim;
};

std::string fmt(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw ConfigError(std::string("missing required option ") + flag);
}

Split split_of(const Options& o) {
    auto s = parse_split(o.split);
    if (!s) throw ConfigError("unknown split '" + o.split + "' (expected train, dev or test)");
    return *s;
}

EmbeddingStore load_store(const Options& o, const std::vector<DatasetRecord>& records,
                          const std::vector<MisT>& mists) {
    if (!o.embeddings.empty() && o.hash_dim > 0) {
        throw ConfigError("--embeddings and --hash-dim are mutually exclusive");
    }
    if (!o.embeddings.empty()) return read_embedding_store(o.embeddings);
    if (o.hash_dim > 0) return hash_embedding_store(records, mists, o.hash_dim);
    throw ConfigError("no content embeddings: pass --embeddings FILE or --hash-dim N");
}

void check_dims(const ModelState& state, const EmbeddingStore& store) {
    if (store.dim() != state.content_dim()) {
        throw ShapeError("embedding dimension mismatch: store has " + std::to_string(store.dim()) +
                         ", checkpoint expects " + std::to_string(state.content_dim()));
    }
}

InferOptions infer_options(const Options& o) {
    InferOptions io;
    if (o.acs_depth == 0) throw ConfigError("--acs-depth must be at least 1");
    io.depth = o.acs_depth;
    io.jobs = o.deterministic ? 1u : std::max(1u, o.jobs);
    io.undefined_as_nostance = o.undefined_as_nostance;
    return io;
}

std::vector<StancePair> prediction_pairs(const std::vector<PredictionRecord>& preds) {
    std::vector<StancePair> out;
    out.reserve(preds.size());
    for (const auto& p : preds) out.push_back({p.tweet_id, p.mist_id, p.stance});
    return out;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    require(o.dataset, "--dataset");
    require(o.mists, "--mists");
    std::vector<std::string> errors;
    const auto parsed = parse_dataset(o.dataset);
    for (const auto& issue : parsed.issues) {
        errors.push_back(o.dataset + ":" + std::to_string(issue.line) + ": " + issue.message);
    }
    const auto mists = read_mists(o.mists);
    std::set<std::string> mist_ids;
    for (const auto& m : mists) {
        if (!mist_ids.insert(m.id).second) errors.push_back("duplicate MisT '" + m.id + "'");
    }

    std::set<std::pair<std::string, std::string>> seen;
    std::map<Split, std::size_t> split_counts;
    std::map<StanceLabel, std::size_t> stance_counts;
    for (const auto& r : parsed.records) {
        if (!mist_ids.count(r.mist_id)) {
            errors.push_back("tweet '" + r.tweet_id + "': unknown mist_id '" + r.mist_id + "'");
        }
        if (!seen.insert({r.tweet_id, r.mist_id}).second) {
            errors.push_back("duplicate pair (" + r.tweet_id + ", " + r.mist_id + ")");
        }
        ++split_counts[r.split];
        ++stance_counts[r.stance];
    }

    if (!o.embeddings.empty()) {
        const auto store = read_embedding_store(o.embeddings);
        std::size_t missing = 0;
        auto check = [&](const std::string& key) {
            if (!store.contains(key) && ++missing <= 20) errors.push_back("no embedding for '" + key + "'");
        };
        for (const auto& m : mists) check(m.id);
        std::set<std::string> tweets;
        for (const auto& r : parsed.records) {
            if (tweets.insert(r.tweet_id).second) check(r.tweet_id);
        }
        if (missing > 20) errors.push_back(std::to_string(missing - 20) + " more missing embeddings");
        if (!o.checkpoint.empty()) {
            const auto ckpt = read_checkpoint(o.checkpoint);
            if (store.dim() != ckpt.state.content_dim()) {
                errors.push_back("embedding dimension mismatch: store has " + std::to_string(store.dim()) +
                                 ", checkpoint expects " + std::to_string(ckpt.state.content_dim()));
            }
        }
    }

    const std::size_t n_train = split_counts[Split::Train];
    const std::size_t n_dev = split_counts[Split::Dev];
    const std::size_t n_test = split_counts[Split::Test];
    out << "records: " << parsed.records.size() << " (train " << n_train << ", dev " << n_dev << ", test "
        << n_test << ")\n";
    out << "stances: Accept " << stance_counts[StanceLabel::Accept] << ", Reject "
        << stance_counts[StanceLabel::Reject] << ", NoStance " << stance_counts[StanceLabel::NoStance] << "\n";
    out << "mists: " << mists.size() << "\n";
    if (n_train == 5267 && n_dev == 527 && n_test == 1452) {
        out << "note: CoVaxLies-full detected (5,267 train / 527 dev / 1,452 test pairs)\n";
    }
    if (!errors.empty()) {
        for (const auto& e : errors) err << "error: " << e << "\n";
        err << errors.size() << " error(s)\n";
        return 1;
    }
    out << "ok\n";
    return 0;
}

int cmd_synth(const Options& o, std::ostream& out) {
    require(o.dataset, "--dataset");
    require(o.mists, "--mists");
    require(o.embeddings, "--embeddings");
    SynthParams p;
    p.separation = o.separation;
    p.tweets = o.tweets;
    p.mists = o.num_mists;
    p.seed = o.seed.value_or(p.seed);
    p.dim = o.dim;
    const auto data = generate_synthetic(p);
    write_dataset(o.dataset, data.records);
    write_mists(o.mists, data.mists);
    write_embedding_store(o.embeddings, data.store);
    out << "wrote " << data.records.size() << " records, " << data.mists.size() << " mists, "
        << data.store.size() << " embeddings (dim " << data.store.dim() << ")\n";
    return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
    require(o.dataset, "--dataset");
    require(o.mists, "--mists");
    require(o.checkpoint, "--checkpoint");
    TrainConfig cfg;
    std::map<std::string, std::string> kv;
    if (!o.config.empty()) kv = read_config(o.config);
    apply_train_config(kv, cfg);
    if (!o.model.empty()) {
        auto kind = parse_model_kind(o.model);
        if (!kind) throw ConfigError("unknown model '" + o.model + "'");
        cfg.model = *kind;
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.epochs) cfg.epochs = *o.epochs;
    cfg.validate();

    const auto records = read_dataset(o.dataset);
    const auto mists = read_mists(o.mists);
    const auto store = load_store(o, records, mists);
    const auto smkgs = build_smkgs(records, Split::Train, mists);
    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.state = train(cfg, smkgs, store, mists, [&](const EpochStats& s) {
        out << "epoch " << s.epoch << " mean_loss " << fmt(s.mean_loss, 6) << " pairs " << s.pairs << "\n";
    });
    write_checkpoint(o.checkpoint, ckpt);
    out << "wrote checkpoint " << o.checkpoint << "\n";
    return 0;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
    require(o.dataset, "--dataset");
    require(o.mists, "--mists");
    require(o.checkpoint, "--checkpoint");
    auto ckpt = read_checkpoint(o.checkpoint);
    const auto records = read_dataset(o.dataset);
    const auto mists = read_mists(o.mists);
    const auto store = load_store(o, records, mists);
    check_dims(ckpt.state, store);
    const auto smkgs = build_smkgs(records, Split::Train, mists);
    const auto table =
        calibrate_thresholds(ckpt.state, store, smkgs, gold_pairs(records, Split::Dev), infer_options(o));
    ckpt.thresholds = table;
    write_checkpoint(o.checkpoint, ckpt);
    if (!o.thresholds.empty()) write_thresholds(o.thresholds, table);
    for (const auto& [mist, t] : table.per_mist) out << mist << "\t" << fmt(t, 6) << "\n";
    out << "*\t" << fmt(table.global_fallback, 6) << "\n";
    return 0;
}

int cmd_infer(const Options& o, std::ostream& out) {
    require(o.dataset, "--dataset");
    require(o.mists, "--mists");
    require(o.checkpoint, "--checkpoint");
    require(o.predictions, "--predictions");
    const auto ckpt = read_checkpoint(o.checkpoint);
    ThresholdTable table;
    if (o.threshold) {
        table.global_fallback = *o.threshold;
    } else if (!o.thresholds.empty()) {
        table = read_thresholds(o.thresholds);
    } else if (ckpt.thresholds) {
        table = *ckpt.thresholds;
    } else {
        throw ConfigError("no threshold table: run `lacr calibrate` on this checkpoint, pass --thresholds FILE, "
                          "or pass --threshold VALUE");
    }
    const auto records = read_dataset(o.dataset);
    const auto mists = read_mists(o.mists);
    const auto store = load_store(o, records, mists);
    check_dims(ckpt.state, store);
    const auto smkgs = build_smkgs(records, Split::Train, mists);
    const auto result =
        infer(ckpt.state, store, smkgs, unlabeled_pairs(records, split_of(o)), table, infer_options(o));
    write_predictions(o.predictions, result.predictions);
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& p : result.predictions) ++counts[label_index(p.stance)];
    out << "predictions: " << result.predictions.size() << " (Accept " << counts[0] << ", Reject " << counts[1]
        << ", NoStance " << counts[2] << ")\n";
    return 0;
}

void print_report(const EvalReport& r, const ThemeReport& themes, std::ostream& out) {
    out << "class      precision  recall  f1\n";
    auto row = [&](const char* name, const ClassMetrics& c) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-10s %9.4f %7.4f %7.4f\n", name, c.precision, c.recall, c.f1);
        out << buf;
    };
    row("Accept", r.accept);
    row("Reject", r.reject);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-10s %9.4f %7.4f %7.4f\n", "macro", r.macro.precision, r.macro.recall,
                  r.macro.f1);
    out << buf;
    for (const auto& [theme, s] : themes) {
        std::snprintf(buf, sizeof buf, "theme %-24s accept_f1 %.4f reject_f1 %.4f support %zu\n", theme.c_str(),
                      s.accept_f1, s.reject_f1, s.support);
        out << buf;
    }
    if (r.zero_division) out << "warning: some metrics involved a zero division and were set to 0\n";
}

int cmd_eval(const Options& o, std::ostream& out, bool write_files) {
    require(o.dataset, "--dataset");
    require(o.mists, "--mists");
    require(o.predictions, "--predictions");
    const auto records = read_dataset(o.dataset);
    const auto mists = read_mists(o.mists);
    const auto gold = gold_pairs(records, split_of(o));
    const auto pred = prediction_pairs(read_predictions(o.predictions));
    const auto report = evaluate(gold, pred);
    const auto themes = evaluate_by_theme(gold, pred, mists);
    if (write_files) {
        if (!o.report.empty()) write_file_atomic(o.report, report_json(report, themes));
        if (!o.csv.empty()) write_file_atomic(o.csv, theme_csv(themes));
    }
    print_report(report, themes, out);
    return 0;
}

int cmd_report(const Options& o, std::ostream& out) {
    if (o.checkpoint.empty() && o.predictions.empty()) {
        throw ConfigError("report needs --checkpoint and/or --predictions with --dataset and --mists");
    }
    if (!o.checkpoint.empty()) {
        const auto ckpt = read_checkpoint(o.checkpoint);
        out << "model " << to_string(ckpt.state.kind) << ", d " << ckpt.state.d() << ", content dim "
            << ckpt.state.content_dim() << ", parameters " << parameter_count(ckpt.state.params) << ", steps "
            << ckpt.state.step << "\n";
        out << format_train_config(ckpt.config);
        if (ckpt.thresholds) {
            out << "thresholds: " << ckpt.thresholds->per_mist.size() << " MisTs, fallback "
                << fmt(ckpt.thresholds->global_fallback, 6) << "\n";
        } else {
            out << "thresholds: not calibrated\n";
        }
    }
    if (!o.predictions.empty()) cmd_eval(o, out, false);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stance identification over misinformation targets"};
    app.name("lacr");
    app.require_subcommand(1);
    Options o;

    auto data_opts = [&](CLI::App* c) {
        c->add_option("--dataset", o.dataset, "dataset JSONL");
        c->add_option("--mists", o.mists, "MisT JSONL");
        c->add_option("--embeddings", o.embeddings, "content embedding store");
        c->add_option("--hash-dim", o.hash_dim, "hash-encode texts into N dims instead of --embeddings");
    };
    auto infer_opts = [&](CLI::App* c) {
        c->add_option("--acs-depth", o.acs_depth, "ACS depth L")->capture_default_str();
        c->add_option("--jobs", o.jobs, "worker threads for scoring")->capture_default_str();
        c->add_flag("--deterministic", o.deterministic, "single-threaded");
        c->add_flag("--undefined-as-nostance", o.undefined_as_nostance,
                    "predict NoStance for MisTs without labeled tweets");
    };

    auto* validate = app.add_subcommand("validate", "check a dataset, its MisTs and embeddings");
    data_opts(validate);
    validate->add_option("--checkpoint", o.checkpoint, "also check the embedding dimension against it");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with planted stance clusters");
    synth->add_option("--dataset", o.dataset, "output dataset JSONL")->required();
    synth->add_option("--mists", o.mists, "output MisT JSONL")->required();
    synth->add_option("--embeddings", o.embeddings, "output embedding store")->required();
    synth->add_option("--separation", o.separation, "cluster separation")->capture_default_str();
    synth->add_option("--tweets", o.tweets, "number of tweets")->capture_default_str();
    synth->add_option("--num-mists", o.num_mists, "number of MisTs")->capture_default_str();
    synth->add_option("--dim", o.dim, "content dimension")->capture_default_str();
    synth->add_option("--seed", o.seed, "random seed");

    auto* train_cmd = app.add_subcommand("train", "train the relation scorer and write a checkpoint");
    data_opts(train_cmd);
    train_cmd->add_option("--config", o.config, "key = value training config");
    train_cmd->add_option("--checkpoint", o.checkpoint, "output checkpoint");
    train_cmd->add_option("--model", o.model, "transe|transd|transms|tucker|rotate");
    train_cmd->add_option("--seed", o.seed, "random seed");
    train_cmd->add_option("--epochs", o.epochs, "number of epochs");
    train_cmd->add_flag("--deterministic", o.deterministic, "single-threaded (training always is)");

    auto* calibrate = app.add_subcommand("calibrate", "fit per-MisT thresholds on the dev split");
    data_opts(calibrate);
    infer_opts(calibrate);
    calibrate->add_option("--checkpoint", o.checkpoint, "checkpoint, updated in place with the thresholds");
    calibrate->add_option("--thresholds", o.thresholds, "also write the table to this file");

    auto* infer_cmd = app.add_subcommand("infer", "predict stances for a split");
    data_opts(infer_cmd);
    infer_opts(infer_cmd);
    infer_cmd->add_option("--checkpoint", o.checkpoint, "trained checkpoint");
    infer_cmd->add_option("--thresholds", o.thresholds, "threshold table file");
    infer_cmd->add_option("--threshold", o.threshold, "single threshold for every MisT");
    infer_cmd->add_option("--predictions", o.predictions, "output predictions JSONL");
    infer_cmd->add_option("--split", o.split, "split to predict")->capture_default_str();

    auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold labels");
    eval_cmd->add_option("--dataset", o.dataset, "dataset JSONL");
    eval_cmd->add_option("--mists", o.mists, "MisT JSONL");
    eval_cmd->add_option("--predictions", o.predictions, "predictions JSONL");
    eval_cmd->add_option("--split", o.split, "gold split")->capture_default_str();
    eval_cmd->add_option("--report", o.report, "output JSON report");
    eval_cmd->add_option("--csv", o.csv, "output per-theme CSV");

    auto* report = app.add_subcommand("report", "summarize a checkpoint and/or predictions");
    report->add_option("--checkpoint", o.checkpoint, "checkpoint");
    report->add_option("--dataset", o.dataset, "dataset JSONL");
    report->add_option("--mists", o.mists, "MisT JSONL");
    report->add_option("--predictions", o.predictions, "predictions JSONL");
    report->add_option("--split", o.split, "gold split")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run `lacr --help` for usage\n";
        return 2;
    }

    try {
        if (*validate) return cmd_validate(o, out, err);
        if (*synth) return cmd_synth(o, out);
        if (*train_cmd) return cmd_train(o, out);
        if (*calibrate) return cmd_calibrate(o, out);
        if (*infer_cmd) return cmd_infer(o, out);
        if (*eval_cmd) return cmd_eval(o, out, true);
        if (*report) return cmd_report(o, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace lacr
