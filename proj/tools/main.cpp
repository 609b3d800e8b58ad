#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "hvv/checkpoint.hpp"
#include "hvv/config.hpp"
#include "hvv/dataset.hpp"
#include "hvv/errors.hpp"
#include "hvv/evalkit.hpp"
#include "hvv/knowledge.hpp"
#include "hvv/model.hpp"
#include "hvv/selftest.hpp"
#include "hvv/synth.hpp"
#include "hvv/train.hpp"

namespace fs = std::filesystem;

namespace {

// exit codes: 0 ok, 2 usage, 3 data/config, 4 numeric
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CommonOpts {
    std::string data;
    std::string config;
    std::string checkpoint;
    std::string out;
    std::string dump;
    std::string preds;
    std::string baseline_preds;
    std::string ablate;
    std::string fusion;
    std::string split = "test";
    std::string id;
    std::string entity;
    std::string sizes = "2600";
    std::string attn_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void apply_ablate(hvv::ModelConfig& cfg, const std::string& ablate) {
    if (ablate.empty()) return;
    std::stringstream ss(ablate);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "caption") cfg.use_caption = false;
        else if (item == "face") cfg.use_face_labels = false;
        else if (item == "commonsense") cfg.use_commonsense = false;
        else if (item == "vision") cfg.use_vision = false;
        else throw hvv::ConfigError("--ablate: unknown module '" + item +
                                    "' (expected caption, face, commonsense or vision)");
    }
}

void apply_fusion(hvv::ModelConfig& cfg, const std::string& fusion) {
    if (fusion.empty()) return;
    if (fusion == "otk") cfg.fusion = hvv::FusionMode::Otk;
    else if (fusion == "cat") cfg.fusion = hvv::FusionMode::Cat;
    else throw hvv::ConfigError("--fusion must be otk or cat");
}

hvv::Config load_config_or_default(const CommonOpts& opts) {
    hvv::Config cfg;
    if (!opts.config.empty()) cfg = hvv::load_config(opts.config);
    apply_ablate(cfg.model, opts.ablate);
    apply_fusion(cfg.model, opts.fusion);
    if (opts.seed_set) cfg.train.seed = opts.seed;
    cfg.model.validate();
    cfg.train.validate();
    return cfg;
}

hvv::EdgeDump load_dump_if_any(const CommonOpts& opts, bool needed) {
    if (!opts.dump.empty()) {
        auto dump = hvv::load_edge_dump(opts.dump);
        if (dump.skipped_lines > 0) {
            std::cerr << "warning: skipped " << dump.skipped_lines
                      << " malformed line(s) in " << opts.dump << "\n";
        }
        return dump;
    }
    if (needed) {
        std::cerr << "warning: no --dump given; commonsense graphs will have no "
                     "knowledge nodes\n";
    }
    return {};
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw hvv::IoError("cannot write " + path.string());
    out << content;
}

int cmd_train(const CommonOpts& opts) {
    const auto cfg = load_config_or_default(opts);
    const auto data = hvv::load_dataset(opts.data);
    const auto train_set = hvv::filter_split(data, "train");
    const auto val_set = hvv::filter_split(data, "val");
    if (train_set.empty() || val_set.empty()) {
        throw hvv::ValidationError("train needs non-empty train and val splits in " + opts.data);
    }
    const auto dump = load_dump_if_any(opts, cfg.model.use_commonsense);

    hvv::RoleClassifier model(cfg.model, cfg.train.seed);
    std::cout << "parameters: " << model.parameter_count() << "\n";
    const auto result = hvv::train_model(model, train_set, val_set, cfg.train, dump);

    fs::create_directories(opts.out);
    hvv::save_checkpoint((fs::path(opts.out) / "checkpoint.bin").string(), model);
    {
        std::ofstream log(fs::path(opts.out) / "train_log.jsonl");
        if (!log) throw hvv::IoError("cannot write train log");
        for (const auto& epoch : result.logs) log << epoch.to_json() << "\n";
    }
    for (const auto& epoch : result.logs) std::cout << epoch.to_json() << "\n";
    if (result.has_val_report) {
        write_file(fs::path(opts.out) / "val_report.json", result.best_val_report.to_json());
        write_file(fs::path(opts.out) / "val_report.txt", result.best_val_report.to_text());
        write_file(fs::path(opts.out) / "confusion.csv", result.best_val_report.confusion_csv());
        std::cout << "best epoch: " << result.best_epoch << "\n"
                  << result.best_val_report.to_text();
    }
    std::cout << "checkpoint: " << (fs::path(opts.out) / "checkpoint.bin").string() << "\n";
    return kExitOk;
}

std::vector<hvv::RoleLabel> join_predictions(const std::vector<hvv::MemeInstance>& instances,
                                             const std::vector<hvv::Prediction>& preds) {
    std::map<std::pair<std::string, std::string>, hvv::RoleLabel> by_key;
    for (const auto& p : preds) by_key[{p.id, p.entity}] = p.role;
    std::vector<hvv::RoleLabel> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
        auto it = by_key.find({inst.id, inst.entity});
        if (it == by_key.end()) {
            throw hvv::ValidationError("no prediction for instance ('" + inst.id + "', '" +
                                       inst.entity + "')");
        }
        out.push_back(it->second);
    }
    return out;
}

int cmd_evaluate(const CommonOpts& opts) {
    if (opts.checkpoint.empty() == opts.preds.empty()) {
        throw hvv::ConfigError("evaluate needs exactly one of --checkpoint or --preds");
    }
    const auto data = hvv::load_dataset(opts.data);
    auto subset = opts.split == "all" ? data : hvv::filter_split(data, opts.split);
    std::erase_if(subset, [](const hvv::MemeInstance& m) { return !m.role.has_value(); });
    if (subset.empty()) {
        throw hvv::ValidationError("no labeled instances in split '" + opts.split + "' of " +
                                   opts.data);
    }
    std::vector<hvv::RoleLabel> gold;
    gold.reserve(subset.size());
    for (const auto& inst : subset) gold.push_back(*inst.role);

    std::vector<hvv::RoleLabel> pred;
    if (!opts.checkpoint.empty()) {
        auto model = hvv::load_checkpoint(opts.checkpoint);
        const auto dump = load_dump_if_any(opts, model.config().use_commonsense);
        const auto preds = model.predict(subset, dump);
        pred.reserve(preds.size());
        for (const auto& p : preds) pred.push_back(p.role);
    } else {
        pred = join_predictions(subset, hvv::load_predictions(opts.preds));
    }

    const auto report = hvv::score(gold, pred);
    std::cout << report.to_text();

    std::string bootstrap_json;
    if (!opts.baseline_preds.empty()) {
        const auto baseline = join_predictions(subset, hvv::load_predictions(opts.baseline_preds));
        const auto result = hvv::bootstrap_test(gold, baseline, pred, 1000, 1000, opts.seed);
        bootstrap_json = result.to_json();
        std::cout << "bootstrap (baseline vs this system): delta=" << result.observed_delta
                  << " p=" << result.p_value << "\n";
    }

    if (!opts.out.empty()) {
        fs::create_directories(opts.out);
        write_file(fs::path(opts.out) / "report.json", report.to_json());
        write_file(fs::path(opts.out) / "report.txt", report.to_text());
        write_file(fs::path(opts.out) / "confusion.csv", report.confusion_csv());
        if (!bootstrap_json.empty()) {
            write_file(fs::path(opts.out) / "bootstrap.json", bootstrap_json);
        }
    }
    return kExitOk;
}

int cmd_predict(const CommonOpts& opts) {
    auto model = hvv::load_checkpoint(opts.checkpoint);
    const auto data = hvv::load_dataset(opts.data);
    auto subset = opts.split == "all" ? data : hvv::filter_split(data, opts.split);
    if (subset.empty()) {
        throw hvv::ValidationError("no instances in split '" + opts.split + "' of " + opts.data);
    }
    const auto dump = load_dump_if_any(opts, model.config().use_commonsense);

    std::vector<hvv::Prediction> preds;
    preds.reserve(subset.size());
    if (!opts.attn_dir.empty()) fs::create_directories(opts.attn_dir);
    for (const auto& inst : subset) {
        const auto prep = model.prepare(inst, dump);
        if (!opts.attn_dir.empty()) {
            hvv::Tape tape;
            hvv::Diagnostics diag;
            model.forward(tape, prep, &diag);
            auto dump_csv = [&](const hvv::TensorPtr& t, const std::string& name) {
                if (!t) return;
                std::ostringstream csv;
                csv.precision(17);
                for (int i = 0; i < t->rows; ++i) {
                    for (int j = 0; j < t->cols; ++j) {
                        if (j) csv << ',';
                        csv << t->at(i, j);
                    }
                    csv << '\n';
                }
                write_file(fs::path(opts.attn_dir) / (inst.id + "_" + name + ".csv"), csv.str());
            };
            dump_csv(diag.fusion_attn, "fusion_attn");
            dump_csv(diag.text_attn, "text_attn");
            dump_csv(diag.vision_attn, "vision_attn");
            dump_csv(diag.graph_text_attn, "graph_text_attn");
            dump_csv(diag.vision_plan.T, "vision_plan");
            dump_csv(diag.graph_plan.T, "graph_plan");
        }
        preds.push_back(model.predict_one(prep));
    }
    hvv::save_predictions(opts.out, preds);
    std::cout << "wrote " << preds.size() << " predictions to " << opts.out << "\n";
    return kExitOk;
}

int cmd_stats(const CommonOpts& opts) {
    const auto data = hvv::load_dataset(opts.data);
    const auto stats = hvv::dataset_stats(data);
    std::cout << stats.to_text();
    if (!opts.out.empty()) write_file(opts.out, stats.to_json());
    return kExitOk;
}

int cmd_graph(const CommonOpts& opts) {
    const auto data = hvv::load_dataset(opts.data);
    const hvv::MemeInstance* found = nullptr;
    for (const auto& inst : data) {
        if (inst.id == opts.id && inst.entity == opts.entity) {
            found = &inst;
            break;
        }
    }
    if (!found) {
        throw hvv::ValidationError("no instance with id '" + opts.id + "' and entity '" +
                                   opts.entity + "' in " + opts.data);
    }
    const auto dump = load_dump_if_any(opts, true);
    const auto ocr_chunks = found->ocr_chunks_override
                                ? *found->ocr_chunks_override
                                : hvv::extract_noun_chunks(hvv::tokenize(found->ocr_text));
    const auto caption_chunks =
        found->caption_chunks_override
            ? *found->caption_chunks_override
            : hvv::extract_noun_chunks(hvv::tokenize(found->caption));
    const auto graph = hvv::build_graph(ocr_chunks, caption_chunks, found->entity, dump, 5);
    const auto json = hvv::graph_to_json(graph);
    std::cout << json << "\n";
    if (!opts.out.empty()) write_file(opts.out, json);
    return kExitOk;
}

int cmd_selftest() {
    const auto results = hvv::run_selftests();
    bool all_passed = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.suite << ": max error "
                  << r.max_error << " (tolerance " << r.tolerance << ")\n";
        all_passed = all_passed && r.passed;
    }
    return all_passed ? kExitOk : kExitNumeric;
}

int cmd_synth(const CommonOpts& opts) {
    hvv::SynthOptions synth_opts;
    synth_opts.seed = opts.seed_set ? opts.seed : 7;
    synth_opts.sizes.clear();
    std::stringstream ss(opts.sizes);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            synth_opts.sizes.push_back(std::stol(item));
        } catch (const std::exception&) {
            throw hvv::ConfigError("--sizes: not a count: '" + item + "'");
        }
    }
    const auto corpus = hvv::make_synth_corpus(synth_opts);
    hvv::write_synth_corpus(opts.out, corpus);
    std::cout << "wrote " << corpus.instances.size() << " instances and "
              << corpus.triples.size() << " knowledge edges under " << opts.out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"role classification of entities referenced in memes "
                 "(hero / villain / victim / other)"};
    app.require_subcommand(1);
    CommonOpts opts;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", opts.seed, "RNG seed")->each([&](const std::string&) {
            opts.seed_set = true;
        });
    };

    auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
    train->add_option("--data", opts.data, "dataset JSONL")->required();
    train->add_option("--config", opts.config, "key = value config file");
    train->add_option("--out", opts.out, "output directory")->required();
    train->add_option("--dump", opts.dump, "knowledge edge TSV");
    train->add_option("--ablate", opts.ablate,
                      "comma list of modules to disable: caption,face,commonsense,vision");
    train->add_option("--fusion", opts.fusion, "fusion mode: otk or cat");
    add_seed(train);

    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint or a predictions file");
    evaluate->add_option("--data", opts.data, "dataset JSONL")->required();
    evaluate->add_option("--checkpoint", opts.checkpoint, "model checkpoint");
    evaluate->add_option("--preds", opts.preds, "predictions JSONL to score instead of a model");
    evaluate->add_option("--baseline-preds", opts.baseline_preds,
                         "baseline predictions JSONL; runs the bootstrap test");
    evaluate->add_option("--dump", opts.dump, "knowledge edge TSV");
    evaluate->add_option("--split", opts.split, "split to score (train/val/test/all)");
    evaluate->add_option("--out", opts.out, "output directory for reports");
    add_seed(evaluate);

    auto* predict = app.add_subcommand("predict", "write predictions JSONL");
    predict->add_option("--data", opts.data, "dataset JSONL")->required();
    predict->add_option("--checkpoint", opts.checkpoint, "model checkpoint")->required();
    predict->add_option("--out", opts.out, "output predictions JSONL")->required();
    predict->add_option("--dump", opts.dump, "knowledge edge TSV");
    predict->add_option("--split", opts.split, "split to predict (train/val/test/all)");
    predict->add_option("--dump-attn", opts.attn_dir,
                        "directory for raw attention / transport CSV dumps");

    auto* stats = app.add_subcommand("stats", "dataset statistics summary");
    stats->add_option("--data", opts.data, "dataset JSONL")->required();
    stats->add_option("--out", opts.out, "write JSON stats here");

    auto* graph = app.add_subcommand("graph", "dump one instance's commonsense graph as JSON");
    graph->add_option("--data", opts.data, "dataset JSONL")->required();
    graph->add_option("--dump", opts.dump, "knowledge edge TSV");
    graph->add_option("--id", opts.id, "meme id")->required();
    graph->add_option("--entity", opts.entity, "entity name")->required();
    graph->add_option("--out", opts.out, "write JSON here");

    auto* selftest = app.add_subcommand(
        "selftest", "gradient checks, Sinkhorn marginal suite and metric oracle");
    (void)selftest;

    auto* synth = app.add_subcommand("synth", "generate the planted synthetic corpus");
    synth->add_option("--out", opts.out, "output directory")->required();
    synth->add_option("--sizes", opts.sizes,
                      "instance counts: one value for a single domain, two for covid19,uspolitics");
    add_seed(synth);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(train)) return cmd_train(opts);
        if (app.got_subcommand(evaluate)) return cmd_evaluate(opts);
        if (app.got_subcommand(predict)) return cmd_predict(opts);
        if (app.got_subcommand(stats)) return cmd_stats(opts);
        if (app.got_subcommand(graph)) return cmd_graph(opts);
        if (app.got_subcommand(selftest)) return cmd_selftest();
        if (app.got_subcommand(synth)) return cmd_synth(opts);
    } catch (const hvv::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const hvv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitData;
    } catch (const hvv::ValidationError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const hvv::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitData;
    } catch (const hvv::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitData;
    } catch (const hvv::DimError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
