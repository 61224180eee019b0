// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <random>
#include <vector>

#include "tablelink/context.hpp"
#include "tablelink/corpus.hpp"
#include "tablelink/encoder.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/training.hpp"

namespace tablelink {

using CellTypeScores = std::array<double, kNumCellTypes>;  // kCellTypes order

class CellTypeScorer {
public:
    virtual ~CellTypeScorer() = default;
    virtual CellTypeScores scores(const CellContext& context) const = 0;
};

struct CtcExample {
    CellKey cell;
    CellContext context;
    CellType label = CellType::other;
};

// Raises every positive class to the size of the largest positive class by
// cycling through its examples; each copy gets its context sentences shuffled
// with rng. Originals keep their position; copies are appended.
std::vector<CtcExample> oversample(std::vector<CtcExample> examples, std::mt19937_64& rng);

std::array<std::size_t, kNumCellTypes> class_counts(const std::vector<CtcExample>& examples);

struct CtcOptions {
    BackendSpec backend;
    TrainingConfig training;
    std::size_t n_sentences = kDefaultContextSentences;
    std::size_t max_length = kMaxSequenceLength;
    bool oversample = true;
};

class CtcClassifier final : public CellTypeScorer {
public:
    explicit CtcClassifier(SequenceClassifier model) : model_(std::move(model)) {}

    // Softmax probabilities.
    CellTypeScores scores(const CellContext& context) const override;

    SequenceClassifier& model() noexcept { return model_; }
    const SequenceClassifier& model() const noexcept { return model_; }

private:
    SequenceClassifier model_;
};

// Throws Error if a train cell lacks gold_cell_type or the split is empty.
CtcClassifier train_ctc(const std::vector<CtcExample>& train, const CtcOptions& options, TrainingLog* log = nullptr);
CtcClassifier train_ctc(const Corpus& corpus, const FoldSplit& fold, const CtcOptions& options,
                        TrainingLog* log = nullptr);

std::vector<CtcExample> ctc_examples(const Corpus& corpus, const std::vector<const TableCellRecord*>& cells,
                                     std::size_t n_sentences);

// First maximum in kCellTypes order.
CellType argmax_cell_type(const CellTypeScores& scores) noexcept;
CellType classify(const CellTypeScorer& scorer, const CellContext& context);

OrderedJson cell_key_json(const CellKey& key);
CellKey parse_cell_key(const Json& j);

struct CtcPrediction {
    CellKey cell;
    CellType predicted = CellType::other;
    CellTypeScores scores{};
};

OrderedJson to_json(const CtcPrediction& prediction);
CtcPrediction parse_ctc_prediction(const Json& j);

}  // namespace tablelink
