// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tablelink/cer.hpp"
#include "tablelink/corpus.hpp"
#include "tablelink/ctc.hpp"
#include "tablelink/ed.hpp"
#include "tablelink/encoder.hpp"
#include "tablelink/eval.hpp"
#include "tablelink/kb_store.hpp"
#include "tablelink/source_matching.hpp"
#include "tablelink/training.hpp"

namespace tablelink {

enum class Stage { ingest_kb, ingest_corpus, train_ctc, train_asm, train_dr, train_ed, predict, evaluate, sweep };

inline constexpr std::array<Stage, 9> kStages = {Stage::ingest_kb, Stage::ingest_corpus, Stage::train_ctc,
                                                 Stage::train_asm, Stage::train_dr,      Stage::train_ed,
                                                 Stage::predict,   Stage::evaluate,      Stage::sweep};

std::string_view to_string(Stage stage) noexcept;
std::optional<Stage> parse_stage(std::string_view text) noexcept;

struct PipelineConfig {
    std::filesystem::path kb_dump;
    std::filesystem::path corpus;
    std::filesystem::path work_dir;
    std::filesystem::path fold_config;  // optional "key = value" file
    std::optional<std::string> validation_topic;
    std::vector<std::string> topics;  // overrides the fold vocabulary when set
    std::vector<std::string> only_folds;  // test topics to run; empty means all
    std::size_t n_sentences = kDefaultContextSentences;
    std::size_t k = kDefaultCandidateSetSize;
    double threshold = kDefaultLinkThreshold;
    std::uint64_t seed = 0;
    BackendSpec backend;
    std::size_t max_length = kMaxSequenceLength;
    InterleaveOrder interleave = InterleaveOrder::asr_first;
    TrainingConfig ctc_training;
    TrainingConfig asm_training;
    TrainingConfig dr_training;
    TrainingConfig ed_training;

    // Throws ConfigError on any violated invariant.
    void validate() const;
    FoldConfig folds() const;
    // Stage training settings with the global seed applied.
    TrainingConfig training(Stage stage) const;
};

// JSON config file. Relative paths resolve against the file's directory;
// unknown keys are rejected with ConfigError.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig parse_pipeline_config(const Json& j, const std::filesystem::path& base_dir = {});

// 16 hex digits identifying every setting a trained stage depends on.
std::string stage_hash(const PipelineConfig& config, Stage stage);

// Artifact locations under the work directory.
struct WorkLayout {
    std::filesystem::path root;

    std::filesystem::path kb_dir() const { return root / "kb"; }
    std::filesystem::path corpus_dir() const { return root / "corpus"; }
    std::filesystem::path reports_dir() const { return root / "reports"; }
    std::filesystem::path model_dir(Stage stage, std::string_view test_topic, std::string_view hash) const;
    std::filesystem::path predictions_dir(std::string_view test_topic) const;
};

inline constexpr std::string_view kCtcPredictionsFile = "ctc.jsonl";
inline constexpr std::string_view kRankingsFile = "rankings.jsonl";
inline constexpr std::string_view kRetrievalFile = "retrieval.jsonl";
inline constexpr std::string_view kCandidatesFile = "candidates.jsonl";
inline constexpr std::string_view kScoresFile = "scores.jsonl";
inline constexpr std::string_view kLinksFile = "links.jsonl";

struct PredictionModels {
    const CellTypeScorer* cell_types = nullptr;
    const SourceScorer* sources = nullptr;
    const DenseEmbedder* dense = nullptr;
    const EntityScorer* entities = nullptr;
};

struct PredictOptions {
    std::size_t n_sentences = kDefaultContextSentences;
    std::size_t k = kDefaultCandidateSetSize;
    double threshold = kDefaultLinkThreshold;
    InterleaveOrder interleave = InterleaveOrder::asr_first;
};

struct CellPrediction {
    CtcPrediction ctc;
    std::optional<SourceRanking> ranking;
    std::optional<CandidateList> dr;
    std::optional<CandidateList> asr;
    std::optional<CandidateSet> candidates;
    std::vector<MatchScore> scores;
    std::optional<LinkDecision> link;  // only for linkable predicted types
};

// classify, then for cells typed dataset/method/dataset_and_metric:
// rank_sources, DR + ASR retrieval, interleave, score, decide. Sources are also
// ranked for cells carrying a gold attribution so ASM can be evaluated.
std::vector<CellPrediction> predict_cells(const Corpus& corpus, const KBStore& kb,
                                          const std::vector<const TableCellRecord*>& cells,
                                          const PredictionModels& models, const PredictOptions& options);

void write_predictions(const std::filesystem::path& dir, const std::vector<CellPrediction>& predictions);

// Reads a fold's prediction files against the corpus gold labels.
FoldEvalInput load_fold_eval_input(const std::filesystem::path& predictions_dir, const Corpus& corpus,
                                   const std::string& test_topic);

// Runs one stage; progress goes to log. Throws MissingArtifactError for an
// absent upstream artifact and ConfigError for a bad configuration.
void run_stage(Stage stage, const PipelineConfig& config, std::ostream& log);

// 0 success, 2 missing artifact, 3 configuration violation, 1 anything else.
int exit_code_for(const std::exception& error) noexcept;

}  // namespace tablelink
