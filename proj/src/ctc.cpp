// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/ctc.hpp"

#include <algorithm>
#include <cmath>

#include "tablelink/errors.hpp"

namespace tablelink {

namespace {

std::size_t class_index(CellType t) { return static_cast<std::size_t>(t); }

}  // namespace

std::array<std::size_t, kNumCellTypes> class_counts(const std::vector<CtcExample>& examples) {
    std::array<std::size_t, kNumCellTypes> counts{};
    for (const auto& e : examples) ++counts[class_index(e.label)];
    return counts;
}

std::vector<CtcExample> oversample(std::vector<CtcExample> examples, std::mt19937_64& rng) {
    std::array<std::vector<std::size_t>, kNumCellTypes> members;
    for (std::size_t i = 0; i < examples.size(); ++i) members[class_index(examples[i].label)].push_back(i);

    std::size_t target = 0;
    for (auto t : kCellTypes) {
        if (t != CellType::other) target = std::max(target, members[class_index(t)].size());
    }
    const std::size_t original = examples.size();
    examples.reserve(original + target * (kNumCellTypes - 1));
    for (auto t : kCellTypes) {
        const auto& idx = members[class_index(t)];
        if (t == CellType::other || idx.empty()) continue;
        for (std::size_t k = idx.size(); k < target; ++k) {
            CtcExample copy = examples[idx[k % idx.size()]];
            std::shuffle(copy.context.context_sentences.begin(), copy.context.context_sentences.end(), rng);
            examples.push_back(std::move(copy));
        }
    }
    return examples;
}

CellTypeScores CtcClassifier::scores(const CellContext& context) const {
    const Vector logits = model_.logits(serialize_cell(context, model_.encoder().max_length()));
    const Vector exps = (logits.array() - logits.maxCoeff()).exp().matrix();
    const double z = exps.sum();
    CellTypeScores out{};
    for (std::size_t i = 0; i < kNumCellTypes; ++i) out[i] = exps(static_cast<Eigen::Index>(i)) / z;
    return out;
}

std::vector<CtcExample> ctc_examples(const Corpus& corpus, const std::vector<const TableCellRecord*>& cells,
                                     std::size_t n_sentences) {
    std::vector<CtcExample> out;
    out.reserve(cells.size());
    for (const auto* cell : cells) {
        if (!cell->gold_cell_type) throw Error("cell " + to_string(cell->key()) + " has no gold_cell_type");
        out.push_back({cell->key(), build_cell_context(*cell, corpus.document(cell->document_id), n_sentences),
                       *cell->gold_cell_type});
    }
    return out;
}

CtcClassifier train_ctc(const std::vector<CtcExample>& train, const CtcOptions& options, TrainingLog* log) {
    if (train.empty()) throw Error("train_ctc: empty training split");
    const auto seed = options.training.seed;
    std::vector<CtcExample> augmented;
    if (options.oversample) {
        std::mt19937_64 rng(seed);
        augmented = oversample(train, rng);
    } else {
        augmented = train;
    }
    std::vector<LabeledSequence> sequences;
    sequences.reserve(augmented.size());
    for (const auto& e : augmented) {
        sequences.push_back({serialize_cell(e.context, options.max_length), class_index(e.label)});
    }
    SequenceClassifier model(EncoderModel(make_backend(options.backend, seed), seed, options.max_length),
                             kNumCellTypes, seed);
    auto trained = fit_classifier(model, sequences, options.training);
    if (log) *log = std::move(trained);
    return CtcClassifier(std::move(model));
}

CtcClassifier train_ctc(const Corpus& corpus, const FoldSplit& fold, const CtcOptions& options, TrainingLog* log) {
    return train_ctc(ctc_examples(corpus, corpus.cells_in_topics(fold.train_topics), options.n_sentences), options,
                     log);
}

CellType argmax_cell_type(const CellTypeScores& scores) noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kNumCellTypes; ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return kCellTypes[best];
}

CellType classify(const CellTypeScorer& scorer, const CellContext& context) {
    return argmax_cell_type(scorer.scores(context));
}

OrderedJson cell_key_json(const CellKey& key) {
    OrderedJson j;
    j["document_id"] = key.document_id;
    j["table_id"] = key.table_id;
    j["row"] = key.row;
    j["col"] = key.col;
    return j;
}

CellKey parse_cell_key(const Json& j) {
    return {require_string(j, "document_id"), require_string(j, "table_id"), static_cast<int>(require_int(j, "row")),
            static_cast<int>(require_int(j, "col"))};
}

OrderedJson to_json(const CtcPrediction& prediction) {
    OrderedJson j = cell_key_json(prediction.cell);
    j["predicted_type"] = std::string(to_string(prediction.predicted));
    j["scores"] = prediction.scores;
    return j;
}

CtcPrediction parse_ctc_prediction(const Json& j) {
    CtcPrediction p;
    p.cell = parse_cell_key(j);
    auto type = parse_cell_type(require_string(j, "predicted_type"));
    if (!type) throw ParseError("unknown predicted_type");
    p.predicted = *type;
    const auto& scores = j.at("scores");
    if (!scores.is_array() || scores.size() != kNumCellTypes) throw ParseError("scores must hold 5 numbers");
    for (std::size_t i = 0; i < kNumCellTypes; ++i) p.scores[i] = scores[i].get<double>();
    return p;
}

}  // namespace tablelink
