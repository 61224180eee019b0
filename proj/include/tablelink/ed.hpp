// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "tablelink/cer.hpp"
#include "tablelink/context.hpp"
#include "tablelink/corpus.hpp"
#include "tablelink/encoder.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/kb_store.hpp"
#include "tablelink/training.hpp"

namespace tablelink {

inline constexpr double kDefaultLinkThreshold = 0.5;

class EntityScorer {
public:
    virtual ~EntityScorer() = default;
    // Probability in [0, 1] that the cell refers to entity.
    virtual double probability(const CellContext& context, const Entity& entity) const = 0;
};

struct MatchScore {
    CellKey cell;
    std::string entity_id;
    double probability = 0.0;

    bool operator==(const MatchScore&) const = default;
};

struct LinkDecision {
    CellKey cell;
    std::string outcome;  // entity id or kOutKB
    double top_probability = 0.0;
    double threshold = kDefaultLinkThreshold;

    bool is_outkb() const { return outcome == kOutKB; }
    bool operator==(const LinkDecision&) const = default;
};

TaggedSequence fuse_cell_entity(const CellContext& context, const Entity& entity, std::size_t max_len);

class EntityDisambiguator final : public EntityScorer {
public:
    explicit EntityDisambiguator(PairScorer model) : model_(std::move(model)) {}

    double probability(const CellContext& context, const Entity& entity) const override;

    PairScorer& model() noexcept { return model_; }

private:
    PairScorer model_;
};

struct EdOptions {
    BackendSpec backend;
    TrainingConfig training;
    std::size_t n_sentences = kDefaultContextSentences;
    std::size_t max_length = kMaxSequenceLength;
};

// Positives pair each cell with its gold entity; negatives reuse the mined
// retrieval negatives. Throws Error with no positive pair.
EntityDisambiguator train_ed(const KBStore& kb, const std::vector<ElTrainingPair>& pairs, const EdOptions& options,
                             TrainingLog* log = nullptr);
EntityDisambiguator train_ed(const Corpus& corpus, const FoldSplit& fold, const KBStore& kb,
                             const EdOptions& options, TrainingLog* log = nullptr);

// One score per candidate, in candidate order. Throws NotFoundError for a
// candidate id missing from the KB.
std::vector<MatchScore> score_candidates(const EntityScorer& scorer, const CellContext& context,
                                         const CandidateSet& candidates, const KBStore& kb);

// Highest probability wins, ties to the smaller entity id; OUTKB when that
// probability is below threshold or there are no scores.
LinkDecision decide(const CellKey& cell, std::span<const MatchScore> scores, double threshold = kDefaultLinkThreshold);

OrderedJson to_json(const LinkDecision& decision);
LinkDecision parse_link_decision(const Json& j);

// All scores of one cell on a line: {"cell", "scores":[{"entity_id","prob"}]}.
OrderedJson scores_json(const CellKey& cell, std::span<const MatchScore> scores);
std::pair<CellKey, std::vector<MatchScore>> parse_scores(const Json& j);

}  // namespace tablelink
