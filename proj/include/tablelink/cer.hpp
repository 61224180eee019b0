// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tablelink/context.hpp"
#include "tablelink/corpus.hpp"
#include "tablelink/encoder.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/kb_store.hpp"
#include "tablelink/source_matching.hpp"
#include "tablelink/training.hpp"

namespace tablelink {

enum class RetrievalSource { dr, asr };

struct CandidateEntry {
    std::string entity_id;
    std::size_t rank = 0;  // 1-based
    std::optional<double> score;

    bool operator==(const CandidateEntry&) const = default;
};

struct CandidateList {
    RetrievalSource source = RetrievalSource::dr;
    std::vector<CandidateEntry> entries;

    // Entries from ids with ranks 1..n and no scores.
    static CandidateList from_ids(RetrievalSource source, const std::vector<std::string>& ids);
    std::vector<std::string> ids() const;
};

struct CandidateSetEntry {
    std::string entity_id;
    bool from_dr = false;
    bool from_asr = false;
    std::optional<std::size_t> dr_rank;
    std::optional<std::size_t> asr_rank;

    bool operator==(const CandidateSetEntry&) const = default;
};

struct CandidateSet {
    CellKey cell;
    std::size_t k = 0;
    std::vector<CandidateSetEntry> entries;

    std::vector<std::string> ids() const;
    bool contains(std::string_view entity_id) const;
};

enum class InterleaveOrder { asr_first, dr_first };

std::string_view to_string(InterleaveOrder order) noexcept;
std::optional<InterleaveOrder> parse_interleave_order(std::string_view text) noexcept;

// Alternates the two lists starting with the leading one; an entity already
// emitted is skipped and its turn is spent. Stops at k entries or when both
// lists are exhausted. Provenance reflects membership anywhere in either list.
CandidateSet interleave(const CandidateList& dr, const CandidateList& asr, std::size_t k,
                        InterleaveOrder order = InterleaveOrder::asr_first);

// First k distinct entries of one list, for single-method recall curves.
CandidateSet truncate_list(const CandidateList& list, std::size_t k);

// Fraction of gold-inKB cells whose gold entity is within the first
// min(k, |set|) candidates. A cell without a set counts as a miss; no inKB
// cells or k == 0 gives 0.
double recall_at_k(std::span<const CandidateSet> sets, std::span<const GoldLink> gold, std::size_t k);

inline constexpr std::size_t kDefaultCandidateSetSize = 50;
inline constexpr std::array<std::size_t, 6> kRecallCurveKs = {1, 5, 10, 20, 50, 100};

// Top BM25F entities of the given kind for the query, gold excluded. Padded
// with further same-kind entities in id order when BM25F finds too few.
std::vector<const Entity*> mine_negatives(const KBStore& kb, std::string_view query, EntityKind kind,
                                          std::string_view gold_id, std::size_t n);

class DenseEmbedder {
public:
    virtual ~DenseEmbedder() = default;
    virtual Vector embed_cell(const CellContext& context) const = 0;
    virtual Vector embed_entity(const Entity& entity) const = 0;
};

class DenseRetriever final : public DenseEmbedder {
public:
    explicit DenseRetriever(BiEncoder model) : model_(std::move(model)) {}

    Vector embed_cell(const CellContext& context) const override;
    Vector embed_entity(const Entity& entity) const override;

    BiEncoder& model() noexcept { return model_; }

private:
    BiEncoder model_;
};

// Precomputed entity embeddings for exact nearest-neighbour search.
class EntityIndex {
public:
    EntityIndex(const DenseEmbedder& embedder, const KBStore& kb);

    // k nearest by Euclidean distance, ties by entity id; score holds the distance.
    CandidateList search(const Vector& query, std::optional<EntityKind> kind, std::size_t k) const;

    std::size_t size() const noexcept { return embeddings_.size(); }

private:
    const KBStore* kb_;
    std::vector<Vector> embeddings_;  // aligned with kb.entities()
};

// Empty for cell types that are not linked.
CandidateList dr_candidates(const DenseEmbedder& embedder, const CellContext& context, const EntityIndex& index,
                            CellType cell_type, std::size_t k);

// Entities of the ranked sources' KB papers in ranking order, each paper's
// entities in id order, filtered by kind, first occurrence kept. Sources
// without a KB paper contribute nothing. Score holds the source probability.
CandidateList asr_candidates(const SourceRanking& ranking, const KBStore& kb, CellType cell_type);

struct ElTrainingPair {
    CellKey cell;
    CellContext context;
    std::string gold_id;
    std::vector<std::string> negative_ids;
};

// One pair per gold-inKB cell; negatives mined with the cell text as query.
// Throws NotFoundError when a gold entity is absent from the KB.
std::vector<ElTrainingPair> el_training_pairs(const Corpus& corpus, const KBStore& kb,
                                              const std::vector<const TableCellRecord*>& cells,
                                              std::size_t n_sentences, std::size_t negatives_per_positive);

struct DrOptions {
    BackendSpec backend;
    TrainingConfig training;
    std::size_t n_sentences = kDefaultContextSentences;
    std::size_t max_length = kMaxSequenceLength;
};

// Throws Error when no training pair is available.
DenseRetriever train_dr(const KBStore& kb, const std::vector<ElTrainingPair>& pairs, const DrOptions& options,
                        TrainingLog* log = nullptr);
DenseRetriever train_dr(const Corpus& corpus, const FoldSplit& fold, const KBStore& kb, const DrOptions& options,
                        TrainingLog* log = nullptr);

OrderedJson candidate_set_json(const CandidateSet& set);
CandidateSet parse_candidate_set(const Json& j);
OrderedJson retrieval_json(const CellKey& cell, const CandidateList& dr, const CandidateList& asr);
std::tuple<CellKey, CandidateList, CandidateList> parse_retrieval(const Json& j);

}  // namespace tablelink
