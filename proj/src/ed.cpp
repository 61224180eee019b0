// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/ed.hpp"

#include <cmath>

#include "tablelink/ctc.hpp"
#include "tablelink/errors.hpp"

namespace tablelink {

TaggedSequence fuse_cell_entity(const CellContext& context, const Entity& entity, std::size_t max_len) {
    return fuse_pair(cell_spans(context), entity_spans(entity), max_len);
}

double EntityDisambiguator::probability(const CellContext& context, const Entity& entity) const {
    return model_.probability(fuse_cell_entity(context, entity, model_.encoder().max_length()));
}

EntityDisambiguator train_ed(const KBStore& kb, const std::vector<ElTrainingPair>& pairs, const EdOptions& options,
                             TrainingLog* log) {
    if (pairs.empty()) throw Error("train_ed: no inKB training cells");
    std::vector<TaggedSequence> positives;
    std::vector<TaggedSequence> negatives;
    for (const auto& p : pairs) {
        positives.push_back(fuse_cell_entity(p.context, kb.entity(p.gold_id), options.max_length));
        for (const auto& neg : p.negative_ids) {
            negatives.push_back(fuse_cell_entity(p.context, kb.entity(neg), options.max_length));
        }
    }
    const auto seed = options.training.seed;
    PairScorer model(EncoderModel(make_backend(options.backend, seed), seed, options.max_length), seed);
    auto trained = fit_pairwise(model, positives, negatives, options.training);
    if (log) *log = std::move(trained);
    return EntityDisambiguator(std::move(model));
}

EntityDisambiguator train_ed(const Corpus& corpus, const FoldSplit& fold, const KBStore& kb,
                             const EdOptions& options, TrainingLog* log) {
    const auto pairs = el_training_pairs(corpus, kb, corpus.cells_in_topics(fold.train_topics), options.n_sentences,
                                         static_cast<std::size_t>(options.training.negatives_per_positive));
    return train_ed(kb, pairs, options, log);
}

std::vector<MatchScore> score_candidates(const EntityScorer& scorer, const CellContext& context,
                                         const CandidateSet& candidates, const KBStore& kb) {
    std::vector<MatchScore> out;
    out.reserve(candidates.entries.size());
    for (const auto& c : candidates.entries) {
        out.push_back({candidates.cell, c.entity_id, scorer.probability(context, kb.entity(c.entity_id))});
    }
    return out;
}

LinkDecision decide(const CellKey& cell, std::span<const MatchScore> scores, double threshold) {
    if (std::isnan(threshold)) throw ConfigError("decide: threshold is NaN");
    LinkDecision d{cell, std::string(kOutKB), 0.0, threshold};
    const MatchScore* best = nullptr;
    for (const auto& s : scores) {
        if (!best || s.probability > best->probability ||
            (s.probability == best->probability && s.entity_id < best->entity_id)) {
            best = &s;
        }
    }
    if (!best) return d;
    d.top_probability = best->probability;
    if (best->probability >= threshold) d.outcome = best->entity_id;
    return d;
}

OrderedJson to_json(const LinkDecision& decision) {
    OrderedJson j;
    j["cell"] = cell_key_json(decision.cell);
    j["outcome"] = decision.outcome;
    j["top_prob"] = decision.top_probability;
    j["threshold"] = decision.threshold;
    return j;
}

LinkDecision parse_link_decision(const Json& j) {
    return {parse_cell_key(j.at("cell")), require_string(j, "outcome"), j.at("top_prob").get<double>(),
            j.at("threshold").get<double>()};
}

OrderedJson scores_json(const CellKey& cell, std::span<const MatchScore> scores) {
    OrderedJson j;
    j["cell"] = cell_key_json(cell);
    j["scores"] = OrderedJson::array();
    for (const auto& s : scores) {
        OrderedJson e;
        e["entity_id"] = s.entity_id;
        e["prob"] = s.probability;
        j["scores"].push_back(std::move(e));
    }
    return j;
}

std::pair<CellKey, std::vector<MatchScore>> parse_scores(const Json& j) {
    std::pair<CellKey, std::vector<MatchScore>> out{parse_cell_key(j.at("cell")), {}};
    for (const auto& e : j.at("scores")) {
        out.second.push_back({out.first, require_string(e, "entity_id"), e.at("prob").get<double>()});
    }
    return out;
}

}  // namespace tablelink
