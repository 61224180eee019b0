// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/source_matching.hpp"

#include <algorithm>

#include "tablelink/ctc.hpp"
#include "tablelink/errors.hpp"

namespace tablelink {

ReferenceEntry self_reference(const DocumentRecord& document) {
    ReferenceEntry self;
    self.index_in_reference_section = 0;
    self.title = document.title;
    self.abstract = document.abstract;
    self.matched_kb_paper_id = document.kb_paper_id;
    return self;
}

std::vector<std::pair<SourceCandidate, ReferenceEntry>> source_candidates(const DocumentRecord& document) {
    std::vector<std::pair<SourceCandidate, ReferenceEntry>> out;
    out.reserve(document.references.size() + 1);
    out.emplace_back(SourceCandidate::self(), self_reference(document));
    for (const auto& ref : document.references) {
        out.emplace_back(SourceCandidate::reference(ref.index_in_reference_section), ref);
    }
    return out;
}

SourceRanking rank_sources(const SourceScorer& scorer, const CellContext& context, const DocumentRecord& document) {
    SourceRanking ranking;
    for (const auto& [candidate, entry] : source_candidates(document)) {
        ranking.push_back({candidate, scorer.probability(context, entry), entry.matched_kb_paper_id});
    }
    std::sort(ranking.begin(), ranking.end(), [](const RankedSource& a, const RankedSource& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.candidate < b.candidate;
    });
    return ranking;
}

TaggedSequence fuse_cell_source(const CellContext& context, const ReferenceEntry& source, std::size_t max_len) {
    return fuse_pair(cell_spans(context), paper_spans(source), max_len);
}

double SourceMatcher::probability(const CellContext& context, const ReferenceEntry& source) const {
    return model_.probability(fuse_cell_source(context, source, model_.encoder().max_length()));
}

std::vector<AsmExample> asm_examples(const Corpus& corpus, const std::vector<const TableCellRecord*>& cells,
                                     std::size_t n_sentences) {
    std::vector<AsmExample> out;
    for (const auto* cell : cells) {
        if (!cell->gold_attributed_sources) continue;
        out.push_back({cell->key(), build_cell_context(*cell, corpus.document(cell->document_id), n_sentences),
                       cell->document_id, *cell->gold_attributed_sources});
    }
    return out;
}

SourceMatcher train_asm(const Corpus& corpus, const std::vector<AsmExample>& train, const AsmOptions& options,
                        TrainingLog* log, std::vector<std::string>* warnings) {
    std::vector<TaggedSequence> positives;
    std::vector<TaggedSequence> negatives;
    for (const auto& ex : train) {
        const auto candidates = source_candidates(corpus.document(ex.document_id));
        if (candidates.empty()) {
            if (warnings) warnings->push_back("document " + ex.document_id + " has no candidate sources; skipped");
            continue;
        }
        for (const auto& [candidate, entry] : candidates) {
            auto fused = fuse_cell_source(ex.context, entry, options.max_length);
            (ex.gold.contains(candidate) ? positives : negatives).push_back(std::move(fused));
        }
    }
    if (positives.empty()) throw Error("train_asm: no attributed sources in the training split");
    const auto seed = options.training.seed;
    PairScorer model(EncoderModel(make_backend(options.backend, seed), seed, options.max_length), seed);
    auto trained = fit_pairwise(model, positives, negatives, options.training);
    if (log) *log = std::move(trained);
    return SourceMatcher(std::move(model));
}

SourceMatcher train_asm(const Corpus& corpus, const FoldSplit& fold, const AsmOptions& options, TrainingLog* log,
                        std::vector<std::string>* warnings) {
    return train_asm(corpus, asm_examples(corpus, corpus.cells_in_topics(fold.train_topics), options.n_sentences),
                     options, log, warnings);
}

std::string_view to_string(SourceKind kind) noexcept {
    return kind == SourceKind::self ? "SELF" : "REFERENCE";
}

OrderedJson ranking_json(const CellKey& cell, const SourceRanking& ranking) {
    OrderedJson j;
    j["cell"] = cell_key_json(cell);
    j["ranking"] = OrderedJson::array();
    for (const auto& r : ranking) {
        OrderedJson e;
        e["kind"] = std::string(to_string(r.candidate.kind));
        e["reference_index"] = r.candidate.reference_index;
        e["prob"] = r.probability;
        if (r.kb_paper_id) e["kb_paper_id"] = *r.kb_paper_id;
        j["ranking"].push_back(std::move(e));
    }
    return j;
}

std::pair<CellKey, SourceRanking> parse_ranking(const Json& j) {
    std::pair<CellKey, SourceRanking> out{parse_cell_key(j.at("cell")), {}};
    for (const auto& e : j.at("ranking")) {
        RankedSource r;
        const auto kind = require_string(e, "kind");
        if (kind == "SELF") {
            r.candidate = SourceCandidate::self();
        } else if (kind == "REFERENCE") {
            r.candidate = SourceCandidate::reference(static_cast<int>(require_int(e, "reference_index")));
        } else {
            throw ParseError("unknown source kind '" + kind + "'");
        }
        r.probability = e.at("prob").get<double>();
        r.kb_paper_id = optional_string(e, "kb_paper_id");
        out.second.push_back(std::move(r));
    }
    return out;
}

}  // namespace tablelink
