// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "tablelink/checkpoint.hpp"
#include "tablelink/errors.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/text.hpp"

namespace tablelink {

std::string_view to_string(Stage stage) noexcept {
    switch (stage) {
        case Stage::ingest_kb: return "ingest-kb";
        case Stage::ingest_corpus: return "ingest-corpus";
        case Stage::train_ctc: return "train-ctc";
        case Stage::train_asm: return "train-asm";
        case Stage::train_dr: return "train-dr";
        case Stage::train_ed: return "train-ed";
        case Stage::predict: return "predict";
        case Stage::evaluate: return "evaluate";
        case Stage::sweep: return "sweep";
    }
    return "";
}

std::optional<Stage> parse_stage(std::string_view text) noexcept {
    for (auto s : kStages) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

namespace {

std::string_view model_name(Stage stage) {
    switch (stage) {
        case Stage::train_ctc: return "ctc";
        case Stage::train_asm: return "asm";
        case Stage::train_dr: return "dr";
        case Stage::train_ed: return "ed";
        default: throw Error("stage " + std::string(to_string(stage)) + " has no model");
    }
}

void apply_training(const Json& j, TrainingConfig& t, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "epochs") {
            t.epochs = value.get<int>();
        } else if (key == "batch_size") {
            t.batch_size = value.get<int>();
        } else if (key == "learning_rate") {
            t.learning_rate = value.get<double>();
        } else if (key == "warmup_fraction") {
            t.warmup_fraction = value.get<double>();
        } else if (key == "triplet_margin") {
            t.triplet_margin = value.get<double>();
        } else if (key == "negatives_per_positive") {
            t.negatives_per_positive = value.get<int>();
        } else if (key == "weight_decay") {
            t.weight_decay = value.get<double>();
        } else {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_json_file(const std::filesystem::path& path, const OrderedJson& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

TrainingConfig PipelineConfig::training(Stage stage) const {
    TrainingConfig t;
    switch (stage) {
        case Stage::train_ctc: t = ctc_training; break;
        case Stage::train_asm: t = asm_training; break;
        case Stage::train_dr: t = dr_training; break;
        case Stage::train_ed: t = ed_training; break;
        default: throw Error("stage " + std::string(to_string(stage)) + " has no training settings");
    }
    t.seed = seed;
    return t;
}

FoldConfig PipelineConfig::folds() const {
    FoldConfig f = fold_config.empty() ? FoldConfig{} : load_fold_config(fold_config);
    if (!topics.empty()) f.topics = topics;
    if (validation_topic) f.validation_topic = *validation_topic;
    return f;
}

void PipelineConfig::validate() const {
    if (work_dir.empty()) throw ConfigError("config: work_dir is required");
    if (k < 1) throw ConfigError("config: k must be at least 1");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("config: threshold must lie in [0,1]");
    if (max_length < 16) throw ConfigError("config: max_length must be at least 16");
    if (backend.embedding_dim == 0 || backend.hidden_dim == 0) {
        throw ConfigError("config: backend dimensions must be positive");
    }
    make_backend(backend, seed);
    for (const auto& [name, path] : {std::pair{"kb_dump", &kb_dump}, std::pair{"corpus", &corpus},
                                     std::pair{"fold_config", &fold_config}}) {
        if (!path->empty() && !std::filesystem::exists(*path)) {
            throw ConfigError(std::string("config: ") + name + " does not exist: " + path->string());
        }
    }
    for (auto s : {Stage::train_ctc, Stage::train_asm, Stage::train_dr, Stage::train_ed}) training(s).validate();
    const auto f = folds();
    if (std::find(f.topics.begin(), f.topics.end(), f.validation_topic) == f.topics.end()) {
        throw ConfigError("config: validation topic '" + f.validation_topic + "' is not among the topics");
    }
}

PipelineConfig parse_pipeline_config(const Json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    PipelineConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "kb_dump") {
                c.kb_dump = resolve(base_dir, value.get<std::string>());
            } else if (key == "corpus") {
                c.corpus = resolve(base_dir, value.get<std::string>());
            } else if (key == "work_dir") {
                c.work_dir = resolve(base_dir, value.get<std::string>());
            } else if (key == "fold_config") {
                c.fold_config = resolve(base_dir, value.get<std::string>());
            } else if (key == "validation_topic") {
                c.validation_topic = value.get<std::string>();
            } else if (key == "topics") {
                c.topics = value.get<std::vector<std::string>>();
            } else if (key == "folds") {
                c.only_folds = value.get<std::vector<std::string>>();
            } else if (key == "n_sentences") {
                c.n_sentences = value.get<std::size_t>();
            } else if (key == "k") {
                c.k = value.get<std::size_t>();
            } else if (key == "threshold") {
                c.threshold = value.get<double>();
            } else if (key == "seed") {
                c.seed = value.get<std::uint64_t>();
            } else if (key == "max_length") {
                c.max_length = value.get<std::size_t>();
            } else if (key == "interleave") {
                auto order = parse_interleave_order(value.get<std::string>());
                if (!order) throw ConfigError("config: interleave must be asr_first or dr_first");
                c.interleave = *order;
            } else if (key == "backend") {
                for (const auto& [bk, bv] : value.items()) {
                    if (bk == "name") {
                        c.backend.name = bv.get<std::string>();
                    } else if (bk == "embedding_dim") {
                        c.backend.embedding_dim = bv.get<std::size_t>();
                    } else if (bk == "hidden_dim") {
                        c.backend.hidden_dim = bv.get<std::size_t>();
                    } else {
                        throw ConfigError("config: backend: unknown key '" + bk + "'");
                    }
                }
            } else if (key == "training") {
                if (!value.is_object()) throw ConfigError("config: training must be an object");
                if (value.contains("default")) {
                    for (auto* t : {&c.ctc_training, &c.asm_training, &c.dr_training, &c.ed_training}) {
                        apply_training(value["default"], *t, "config: training.default");
                    }
                }
                for (const auto& [stage, body] : value.items()) {
                    if (stage == "default") continue;
                    TrainingConfig* t = stage == "ctc"   ? &c.ctc_training
                                        : stage == "asm" ? &c.asm_training
                                        : stage == "dr"  ? &c.dr_training
                                        : stage == "ed"  ? &c.ed_training
                                                         : nullptr;
                    if (!t) throw ConfigError("config: training: unknown stage '" + stage + "'");
                    apply_training(body, *t, "config: training." + stage);
                }
            } else {
                throw ConfigError("config: unknown key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_pipeline_config(j, path.parent_path());
}

std::string stage_hash(const PipelineConfig& config, Stage stage) {
    OrderedJson j;
    j["stage"] = std::string(model_name(stage));
    j["backend"] = {{"name", config.backend.name},
                    {"embedding_dim", config.backend.embedding_dim},
                    {"hidden_dim", config.backend.hidden_dim}};
    j["max_length"] = config.max_length;
    j["n_sentences"] = config.n_sentences;
    j["training"] = config.training(stage).to_string();
    const auto f = config.folds();
    j["validation_topic"] = f.validation_topic;
    j["topics"] = f.topics;
    return hex64(fnv1a64(j.dump()));
}

std::filesystem::path WorkLayout::model_dir(Stage stage, std::string_view test_topic, std::string_view hash) const {
    return root / "models" / std::string(model_name(stage)) / (std::string(test_topic) + "-" + std::string(hash));
}

std::filesystem::path WorkLayout::predictions_dir(std::string_view test_topic) const {
    return root / "predictions" / std::string(test_topic);
}

std::vector<CellPrediction> predict_cells(const Corpus& corpus, const KBStore& kb,
                                          const std::vector<const TableCellRecord*>& cells,
                                          const PredictionModels& models, const PredictOptions& options) {
    if (!models.cell_types || !models.sources || !models.dense || !models.entities) {
        throw Error("predict_cells: every model must be provided");
    }
    const EntityIndex index(*models.dense, kb);
    const std::size_t dr_depth = std::max(options.k, kRecallCurveKs.back());
    std::vector<CellPrediction> out;
    out.reserve(cells.size());
    for (const auto* cell : cells) {
        const auto& doc = corpus.document(cell->document_id);
        const auto key = cell->key();
        const auto ctx = build_cell_context(*cell, doc, options.n_sentences);
        CellPrediction p;
        p.ctc.cell = key;
        p.ctc.scores = models.cell_types->scores(ctx);
        p.ctc.predicted = argmax_cell_type(p.ctc.scores);
        const CellType type = p.ctc.predicted;
        const bool linkable = is_linkable(type);
        if (linkable || cell->gold_attributed_sources) p.ranking = rank_sources(*models.sources, ctx, doc);
        if (linkable) {
            p.dr = dr_candidates(*models.dense, ctx, index, type, dr_depth);
            p.asr = asr_candidates(*p.ranking, kb, type);
            p.candidates = interleave(*p.dr, *p.asr, options.k, options.interleave);
            p.candidates->cell = key;
            p.scores = score_candidates(*models.entities, ctx, *p.candidates, kb);
            p.link = decide(key, p.scores, options.threshold);
        }
        out.push_back(std::move(p));
    }
    return out;
}

void write_predictions(const std::filesystem::path& dir, const std::vector<CellPrediction>& predictions) {
    std::filesystem::create_directories(dir);
    JsonlWriter ctc(dir / kCtcPredictionsFile);
    JsonlWriter rankings(dir / kRankingsFile);
    JsonlWriter retrieval(dir / kRetrievalFile);
    JsonlWriter candidates(dir / kCandidatesFile);
    JsonlWriter scores(dir / kScoresFile);
    JsonlWriter links(dir / kLinksFile);
    for (const auto& p : predictions) {
        ctc.write(to_json(p.ctc));
        if (p.ranking) rankings.write(ranking_json(p.ctc.cell, *p.ranking));
        if (p.dr && p.asr) retrieval.write(retrieval_json(p.ctc.cell, *p.dr, *p.asr));
        if (p.candidates) candidates.write(candidate_set_json(*p.candidates));
        if (p.link) {
            scores.write(scores_json(p.ctc.cell, p.scores));
            links.write(to_json(*p.link));
        }
    }
    for (auto* w : {&ctc, &rankings, &retrieval, &candidates, &scores, &links}) w->close();
}

FoldEvalInput load_fold_eval_input(const std::filesystem::path& predictions_dir, const Corpus& corpus,
                                   const std::string& test_topic) {
    FoldEvalInput in;
    in.topic = test_topic;
    const auto cells = corpus.cells_in_topics({test_topic});
    for_each_jsonl(predictions_dir / kCtcPredictionsFile, [&](const Json& j, std::size_t) {
        auto p = parse_ctc_prediction(j);
        in.ctc_predictions[p.cell] = p.predicted;
    });
    for_each_jsonl(predictions_dir / kRankingsFile, [&](const Json& j, std::size_t) {
        auto [key, ranking] = parse_ranking(j);
        in.rankings[key] = std::move(ranking);
    });
    for_each_jsonl(predictions_dir / kLinksFile, [&](const Json& j, std::size_t) {
        auto d = parse_link_decision(j);
        in.links[d.cell] = d.outcome;
    });
    for_each_jsonl(predictions_dir / kRetrievalFile, [&](const Json& j, std::size_t) {
        auto [key, dr, asr] = parse_retrieval(j);
        in.retrievals.push_back({key, std::move(dr), std::move(asr)});
    });
    for (const auto* c : cells) {
        if (c->gold_cell_type) in.ctc_gold.emplace_back(c->key(), *c->gold_cell_type);
        if (c->gold_attributed_sources) in.asm_gold.emplace_back(c->key(), *c->gold_attributed_sources);
    }
    in.el_gold = gold_links(cells);
    // Cells never sent to linking count as OUTKB predictions.
    for (const auto& g : in.el_gold) in.links.try_emplace(g.cell, std::string(kOutKB));
    return in;
}

namespace {

std::vector<FoldSplit> selected_folds(const Corpus& corpus, const PipelineConfig& config) {
    auto folds = make_folds(corpus, config.folds());
    if (config.only_folds.empty()) return folds;
    std::vector<FoldSplit> out;
    for (const auto& name : config.only_folds) {
        auto it = std::find_if(folds.begin(), folds.end(), [&](const FoldSplit& f) { return f.test_topic == name; });
        if (it == folds.end()) throw ConfigError("no fold with test topic '" + name + "'");
        out.push_back(*it);
    }
    return out;
}

ModelManifest manifest_for(const PipelineConfig& config, Stage stage, const std::string& topic) {
    ModelManifest m;
    m.backend = config.backend;
    m.max_length = config.max_length;
    m.seed = config.seed;
    m.training = config.training(stage);
    m.extra["test_topic"] = topic;
    m.extra["n_sentences"] = std::to_string(config.n_sentences);
    m.extra["config_hash"] = stage_hash(config, stage);
    return m;
}

void train_stage(Stage stage, const PipelineConfig& config, std::ostream& log) {
    const WorkLayout layout{config.work_dir};
    const Corpus corpus = load_corpus(layout.corpus_dir(), config.folds());
    std::optional<KBStore> kb;
    if (stage == Stage::train_dr || stage == Stage::train_ed) kb.emplace(ingest_kb(layout.kb_dir()));
    const auto hash = stage_hash(config, stage);
    const auto training = config.training(stage);
    for (const auto& fold : selected_folds(corpus, config)) {
        const auto dir = layout.model_dir(stage, fold.test_topic, hash);
        const auto manifest = manifest_for(config, stage, fold.test_topic);
        TrainingLog tlog;
        switch (stage) {
            case Stage::train_ctc: {
                auto model = train_ctc(corpus, fold,
                                       {config.backend, training, config.n_sentences, config.max_length, true}, &tlog);
                save_classifier(dir, model.model(), manifest);
                break;
            }
            case Stage::train_asm: {
                std::vector<std::string> warnings;
                auto model = train_asm(corpus, fold, {config.backend, training, config.n_sentences, config.max_length},
                                       &tlog, &warnings);
                for (const auto& w : warnings) log << "warning: " << w << "\n";
                save_pair_scorer(dir, model.model(), manifest);
                break;
            }
            case Stage::train_dr: {
                auto model = train_dr(corpus, fold, *kb,
                                      {config.backend, training, config.n_sentences, config.max_length}, &tlog);
                save_bi_encoder(dir, model.model(), manifest);
                break;
            }
            case Stage::train_ed: {
                auto model = train_ed(corpus, fold, *kb,
                                      {config.backend, training, config.n_sentences, config.max_length}, &tlog);
                save_pair_scorer(dir, model.model(), manifest);
                break;
            }
            default: throw Error("not a training stage");
        }
        write_text_file(dir / "training_log.tsv", tlog.to_tsv());
        log << to_string(stage) << " " << fold.test_topic << ": " << tlog.steps.size() << " steps, final loss "
            << tlog.final_loss() << " -> " << dir.string() << "\n";
    }
}

void predict_stage(const PipelineConfig& config, std::ostream& log) {
    const WorkLayout layout{config.work_dir};
    const Corpus corpus = load_corpus(layout.corpus_dir(), config.folds());
    const KBStore kb = ingest_kb(layout.kb_dir());
    const PredictOptions options{config.n_sentences, config.k, config.threshold, config.interleave};
    for (const auto& fold : selected_folds(corpus, config)) {
        auto dir = [&](Stage s) { return layout.model_dir(s, fold.test_topic, stage_hash(config, s)); };
        const CtcClassifier ctc(load_classifier(dir(Stage::train_ctc)));
        const SourceMatcher sources(load_pair_scorer(dir(Stage::train_asm)));
        const DenseRetriever dense(load_bi_encoder(dir(Stage::train_dr)));
        const EntityDisambiguator entities(load_pair_scorer(dir(Stage::train_ed)));
        const auto predictions = predict_cells(corpus, kb, corpus.cells_in_topics({fold.test_topic}),
                                               {&ctc, &sources, &dense, &entities}, options);
        const auto out = layout.predictions_dir(fold.test_topic);
        write_predictions(out, predictions);
        std::size_t linked = 0;
        for (const auto& p : predictions) linked += p.link.has_value();
        log << "predict " << fold.test_topic << ": " << predictions.size() << " cells, " << linked
            << " sent to linking -> " << out.string() << "\n";
    }
}

void evaluate_stage(const PipelineConfig& config, std::ostream& log) {
    const WorkLayout layout{config.work_dir};
    const Corpus corpus = load_corpus(layout.corpus_dir(), config.folds());
    std::vector<FoldEvalInput> inputs;
    for (const auto& fold : selected_folds(corpus, config)) {
        inputs.push_back(load_fold_eval_input(layout.predictions_dir(fold.test_topic), corpus, fold.test_topic));
    }
    const auto report = build_report(inputs);
    const auto dir = layout.reports_dir();
    std::filesystem::create_directories(dir);
    write_text_file(dir / "metrics.txt", report.to_text());
    write_json_file(dir / "metrics.json", report.to_json());
    write_text_file(dir / "recall_at_k.csv", report.recall_csv());
    log << report.to_text();
}

void sweep_stage(const PipelineConfig& config, std::ostream& log) {
    const WorkLayout layout{config.work_dir};
    const Corpus corpus = load_corpus(layout.corpus_dir(), config.folds());
    std::map<CellKey, std::vector<MatchScore>> scores;
    std::vector<GoldLink> gold;
    for (const auto& fold : selected_folds(corpus, config)) {
        for_each_jsonl(layout.predictions_dir(fold.test_topic) / kScoresFile, [&](const Json& j, std::size_t) {
            auto [key, s] = parse_scores(j);
            scores[key] = std::move(s);
        });
        auto g = gold_links(corpus.cells_in_topics({fold.test_topic}));
        gold.insert(gold.end(), g.begin(), g.end());
    }
    const auto grid = default_threshold_grid();
    const auto rows = sweep_thresholds(scores, gold, grid);
    const auto dir = layout.reports_dir();
    std::filesystem::create_directories(dir);
    write_text_file(dir / "sweep.csv", sweep_csv(rows));
    write_json_file(dir / "sweep.json", sweep_json(rows));
    log << sweep_csv(rows);
}

}  // namespace

void run_stage(Stage stage, const PipelineConfig& config, std::ostream& log) {
    config.validate();
    const WorkLayout layout{config.work_dir};
    switch (stage) {
        case Stage::ingest_kb: {
            if (config.kb_dump.empty()) throw ConfigError("ingest-kb: config has no kb_dump");
            if (is_public_dump_dir(config.kb_dump)) {
                const auto r = convert_public_dump(config.kb_dump, layout.kb_dir());
                log << "converted public dump: " << r.methods << " methods, " << r.datasets << " datasets, "
                    << r.papers << " papers, " << r.relations << " relations (" << r.unresolved_relations
                    << " unresolved, " << r.skipped_records << " skipped)\n";
            }
            const KBStore kb = ingest_kb(is_public_dump_dir(config.kb_dump) ? layout.kb_dir() : config.kb_dump);
            write_kb(kb, layout.kb_dir());
            log << "kb: " << kb.num_entities(EntityKind::method) << " methods, "
                << kb.num_entities(EntityKind::dataset) << " datasets, " << kb.num_papers() << " papers, "
                << kb.num_relations() << " relations -> " << layout.kb_dir().string() << "\n";
            return;
        }
        case Stage::ingest_corpus: {
            if (config.corpus.empty()) throw ConfigError("ingest-corpus: config has no corpus");
            const Corpus corpus = load_corpus(config.corpus, config.folds());
            save_corpus(corpus, layout.corpus_dir());
            const auto report = validate_corpus(corpus);
            std::filesystem::create_directories(layout.reports_dir());
            write_text_file(layout.reports_dir() / "corpus_validation.txt", report.to_text());
            log << report.to_text();
            return;
        }
        case Stage::train_ctc:
        case Stage::train_asm:
        case Stage::train_dr:
        case Stage::train_ed: train_stage(stage, config, log); return;
        case Stage::predict: predict_stage(config, log); return;
        case Stage::evaluate: evaluate_stage(config, log); return;
        case Stage::sweep: sweep_stage(config, log); return;
    }
}

int exit_code_for(const std::exception& error) noexcept {
    if (dynamic_cast<const MissingArtifactError*>(&error)) return 2;
    if (dynamic_cast<const ConfigError*>(&error)) return 3;
    return 1;
}

}  // namespace tablelink
