// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tablelink/cer.hpp"
#include "tablelink/corpus.hpp"
#include "tablelink/ed.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/source_matching.hpp"

namespace tablelink {

// Precision, recall and F1 from confusion counts; a zero denominator gives 0.
struct ClassMetrics {
    std::string label;
    std::size_t support = 0;  // tp + fn
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    static ClassMetrics from_counts(std::string label, std::size_t tp, std::size_t fp, std::size_t fn);
};

struct CtcReport {
    std::size_t cells = 0;
    std::vector<ClassMetrics> per_class;  // kCellTypes order
    ClassMetrics micro;
};

using CtcGold = std::pair<CellKey, CellType>;

// Throws Error naming the first gold cell without a prediction.
CtcReport eval_ctc(const std::map<CellKey, CellType>& predictions, std::span<const CtcGold> gold);

struct ElReport {
    std::size_t cells = 0;
    std::size_t gold_outkb = 0;
    std::size_t gold_inkb = 0;
    std::size_t predicted_outkb = 0;
    std::size_t hits = 0;  // gold-inKB cells decided as their gold entity
    ClassMetrics outkb;    // OUTKB as the positive class
    double hit_at_1 = 0.0;
    double accuracy = 0.0;          // (outkb.tp + hits) / cells
    std::optional<double> oi_ratio;  // absent with no gold-inKB cell
};

// decisions map cells to an entity id or kOutKB. Throws Error naming the
// first gold cell without a decision.
ElReport eval_el(const std::map<CellKey, std::string>& decisions, std::span<const GoldLink> gold);

struct AsmReport {
    std::size_t cells = 0;         // cells with a gold source annotation
    std::size_t ranked_cells = 0;  // of which have at least one gold source
    double mrr = 0.0;
    ClassMetrics at_threshold;  // (cell, source) pairs, positive when prob >= threshold
};

using AsmGold = std::pair<CellKey, std::set<SourceCandidate>>;

AsmReport eval_asm(const std::map<CellKey, SourceRanking>& rankings, std::span<const AsmGold> gold,
                   double threshold = 0.5);

struct SweepRow {
    double threshold = 0.0;
    ElReport report;
};

// 0, 0.05, ..., 1 and one point just above 1.
std::vector<double> default_threshold_grid();

// Re-decides every gold cell from stored scores at each threshold. Cells
// without scores were never linked and stay OUTKB.
std::vector<SweepRow> sweep_thresholds(const std::map<CellKey, std::vector<MatchScore>>& scores,
                                       std::span<const GoldLink> gold, std::span<const double> grid);

// Sample Pearson correlation. Throws Error on length mismatch, fewer than two
// points, or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct RecallPoint {
    std::size_t k = 0;
    double dr = 0.0;
    double asr = 0.0;
    double combined = 0.0;
};

struct RetrievalRecord {
    CellKey cell;
    CandidateList dr;
    CandidateList asr;
};

std::vector<RecallPoint> recall_curve(std::span<const RetrievalRecord> retrievals, std::span<const GoldLink> gold,
                                      std::span<const std::size_t> ks,
                                      InterleaveOrder order = InterleaveOrder::asr_first);

struct FoldMetrics {
    std::string topic;
    CtcReport ctc;
    AsmReport source;
    ElReport el;
    std::vector<RecallPoint> recall;
};

struct MetricsReport {
    std::vector<FoldMetrics> folds;
    FoldMetrics micro;  // pooled over every fold's cells
    std::optional<double> pearson_oi_accuracy;

    std::string to_text() const;
    OrderedJson to_json() const;
    std::string recall_csv() const;
};

// Everything evaluate needs for one test fold.
struct FoldEvalInput {
    std::string topic;
    std::map<CellKey, CellType> ctc_predictions;
    std::vector<CtcGold> ctc_gold;
    std::map<CellKey, SourceRanking> rankings;
    std::vector<AsmGold> asm_gold;
    std::map<CellKey, std::string> links;  // every gold EL cell
    std::vector<GoldLink> el_gold;
    std::vector<RetrievalRecord> retrievals;
};

FoldMetrics evaluate_fold(const FoldEvalInput& input, std::span<const std::size_t> ks = kRecallCurveKs);

// Per-fold metrics, pooled micro metrics and the O/I-vs-accuracy correlation
// (absent when it is undefined).
MetricsReport build_report(std::span<const FoldEvalInput> folds, std::span<const std::size_t> ks = kRecallCurveKs);

std::string sweep_csv(const std::vector<SweepRow>& rows);
OrderedJson sweep_json(const std::vector<SweepRow>& rows);

OrderedJson to_json(const ClassMetrics& m);
OrderedJson to_json(const CtcReport& r);
OrderedJson to_json(const ElReport& r);
OrderedJson to_json(const AsmReport& r);

}  // namespace tablelink
