// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tablelink/context.hpp"
#include "tablelink/corpus.hpp"
#include "tablelink/encoder.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/training.hpp"

namespace tablelink {

class SourceScorer {
public:
    virtual ~SourceScorer() = default;
    // Probability in [0, 1] that the cell's concept is attributed to source.
    virtual double probability(const CellContext& context, const ReferenceEntry& source) const = 0;
};

// The document itself as a candidate source: index 0, own title and abstract.
ReferenceEntry self_reference(const DocumentRecord& document);

// SELF followed by every reference entry, in list order.
std::vector<std::pair<SourceCandidate, ReferenceEntry>> source_candidates(const DocumentRecord& document);

struct RankedSource {
    SourceCandidate candidate;
    double probability = 0.0;
    std::optional<std::string> kb_paper_id;
};

// Non-increasing probability; ties SELF first, then ascending reference index.
using SourceRanking = std::vector<RankedSource>;

SourceRanking rank_sources(const SourceScorer& scorer, const CellContext& context, const DocumentRecord& document);

struct AsmOptions {
    BackendSpec backend;
    TrainingConfig training;
    std::size_t n_sentences = kDefaultContextSentences;
    std::size_t max_length = kMaxSequenceLength;
};

class SourceMatcher final : public SourceScorer {
public:
    explicit SourceMatcher(PairScorer model) : model_(std::move(model)) {}

    double probability(const CellContext& context, const ReferenceEntry& source) const override;

    PairScorer& model() noexcept { return model_; }

private:
    PairScorer model_;
};

TaggedSequence fuse_cell_source(const CellContext& context, const ReferenceEntry& source, std::size_t max_len);

struct AsmExample {
    CellKey cell;
    CellContext context;
    std::string document_id;
    std::set<SourceCandidate> gold;
};

std::vector<AsmExample> asm_examples(const Corpus& corpus, const std::vector<const TableCellRecord*>& cells,
                                     std::size_t n_sentences);

// Gold sources are positives; every other candidate in the document is a
// negative. Throws Error when the split yields no positive pair.
SourceMatcher train_asm(const Corpus& corpus, const std::vector<AsmExample>& train, const AsmOptions& options,
                        TrainingLog* log = nullptr, std::vector<std::string>* warnings = nullptr);
SourceMatcher train_asm(const Corpus& corpus, const FoldSplit& fold, const AsmOptions& options,
                        TrainingLog* log = nullptr, std::vector<std::string>* warnings = nullptr);

std::string_view to_string(SourceKind kind) noexcept;

OrderedJson ranking_json(const CellKey& cell, const SourceRanking& ranking);
std::pair<CellKey, SourceRanking> parse_ranking(const Json& j);

}  // namespace tablelink
