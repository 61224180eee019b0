// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/cer.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "tablelink/ctc.hpp"
#include "tablelink/errors.hpp"

namespace tablelink {

CandidateList CandidateList::from_ids(RetrievalSource source, const std::vector<std::string>& ids) {
    CandidateList list{source, {}};
    for (std::size_t i = 0; i < ids.size(); ++i) list.entries.push_back({ids[i], i + 1, std::nullopt});
    return list;
}

std::vector<std::string> CandidateList::ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.entity_id);
    return out;
}

std::vector<std::string> CandidateSet::ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.entity_id);
    return out;
}

bool CandidateSet::contains(std::string_view entity_id) const {
    return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.entity_id == entity_id; });
}

std::string_view to_string(InterleaveOrder order) noexcept {
    return order == InterleaveOrder::asr_first ? "asr_first" : "dr_first";
}

std::optional<InterleaveOrder> parse_interleave_order(std::string_view text) noexcept {
    if (text == "asr_first") return InterleaveOrder::asr_first;
    if (text == "dr_first") return InterleaveOrder::dr_first;
    return std::nullopt;
}

namespace {

std::unordered_map<std::string_view, std::size_t> first_ranks(const CandidateList& list) {
    std::unordered_map<std::string_view, std::size_t> ranks;
    for (const auto& e : list.entries) ranks.emplace(e.entity_id, e.rank);
    return ranks;
}

}  // namespace

CandidateSet interleave(const CandidateList& dr, const CandidateList& asr, std::size_t k, InterleaveOrder order) {
    const auto dr_ranks = first_ranks(dr);
    const auto asr_ranks = first_ranks(asr);
    const CandidateList& lead = order == InterleaveOrder::asr_first ? asr : dr;
    const CandidateList& follow = order == InterleaveOrder::asr_first ? dr : asr;

    CandidateSet out;
    out.k = k;
    std::unordered_set<std::string_view> emitted;
    std::size_t i = 0, j = 0;
    bool lead_turn = true;
    while (out.entries.size() < k && (i < lead.entries.size() || j < follow.entries.size())) {
        const CandidateList& list = lead_turn ? lead : follow;
        std::size_t& pos = lead_turn ? i : j;
        lead_turn = !lead_turn;
        if (pos >= list.entries.size()) continue;
        const std::string& id = list.entries[pos++].entity_id;
        if (!emitted.insert(id).second) continue;
        CandidateSetEntry entry{id, false, false, std::nullopt, std::nullopt};
        if (auto it = dr_ranks.find(id); it != dr_ranks.end()) {
            entry.from_dr = true;
            entry.dr_rank = it->second;
        }
        if (auto it = asr_ranks.find(id); it != asr_ranks.end()) {
            entry.from_asr = true;
            entry.asr_rank = it->second;
        }
        out.entries.push_back(std::move(entry));
    }
    return out;
}

CandidateSet truncate_list(const CandidateList& list, std::size_t k) {
    const CandidateList empty{list.source == RetrievalSource::dr ? RetrievalSource::asr : RetrievalSource::dr, {}};
    return list.source == RetrievalSource::dr ? interleave(list, empty, k) : interleave(empty, list, k);
}

double recall_at_k(std::span<const CandidateSet> sets, std::span<const GoldLink> gold, std::size_t k) {
    std::map<CellKey, const CandidateSet*> by_cell;
    for (const auto& s : sets) by_cell.emplace(s.cell, &s);
    std::size_t inkb = 0;
    std::size_t hits = 0;
    for (const auto& g : gold) {
        if (g.is_outkb()) continue;
        ++inkb;
        auto it = by_cell.find(g.cell);
        if (it == by_cell.end()) continue;
        const auto& entries = it->second->entries;
        const std::size_t n = std::min(k, entries.size());
        for (std::size_t r = 0; r < n; ++r) {
            if (entries[r].entity_id == g.link) {
                ++hits;
                break;
            }
        }
    }
    if (inkb == 0 || k == 0) return 0.0;
    return static_cast<double>(hits) / static_cast<double>(inkb);
}

std::vector<const Entity*> mine_negatives(const KBStore& kb, std::string_view query, EntityKind kind,
                                          std::string_view gold_id, std::size_t n) {
    std::vector<const Entity*> out;
    if (n == 0) return out;
    std::set<std::string_view> taken{gold_id};
    for (const auto& hit : kb.search_bm25f(query, kind, n + 1)) {
        if (out.size() == n) break;
        if (taken.insert(hit.entity->id).second) out.push_back(hit.entity);
    }
    for (const auto& e : kb.entities()) {
        if (out.size() == n) break;
        if (e.kind == kind && taken.insert(e.id).second) out.push_back(&e);
    }
    return out;
}

Vector DenseRetriever::embed_cell(const CellContext& context) const {
    return model_.embed_query(serialize_cell(context, model_.query_tower().max_length()));
}

Vector DenseRetriever::embed_entity(const Entity& entity) const {
    return model_.embed_entity(serialize_entity(entity, model_.entity_tower().max_length()));
}

EntityIndex::EntityIndex(const DenseEmbedder& embedder, const KBStore& kb) : kb_(&kb) {
    embeddings_.reserve(kb.num_entities());
    for (const auto& e : kb.entities()) embeddings_.push_back(embedder.embed_entity(e));
}

CandidateList EntityIndex::search(const Vector& query, std::optional<EntityKind> kind, std::size_t k) const {
    const auto entities = kb_->entities();
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (kind && entities[i].kind != *kind) continue;
        scored.emplace_back((embeddings_[i] - query).norm(), i);
    }
    // Entities are stored in id order, so the index doubles as the id tie-break.
    const std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end());
    CandidateList out{RetrievalSource::dr, {}};
    for (std::size_t r = 0; r < n; ++r) {
        out.entries.push_back({entities[scored[r].second].id, r + 1, scored[r].first});
    }
    return out;
}

CandidateList dr_candidates(const DenseEmbedder& embedder, const CellContext& context, const EntityIndex& index,
                            CellType cell_type, std::size_t k) {
    const auto kind = entity_kind_for(cell_type);
    if (!kind) return {RetrievalSource::dr, {}};
    return index.search(embedder.embed_cell(context), kind, k);
}

CandidateList asr_candidates(const SourceRanking& ranking, const KBStore& kb, CellType cell_type) {
    CandidateList out{RetrievalSource::asr, {}};
    const auto kind = entity_kind_for(cell_type);
    if (!kind) return out;
    std::unordered_set<std::string_view> seen;
    for (const auto& source : ranking) {
        if (!source.kb_paper_id || !kb.find_paper(*source.kb_paper_id)) continue;
        for (const auto* e : kb.entities_for_paper(*source.kb_paper_id, kind)) {
            if (seen.insert(e->id).second) {
                out.entries.push_back({e->id, out.entries.size() + 1, source.probability});
            }
        }
    }
    return out;
}

std::vector<ElTrainingPair> el_training_pairs(const Corpus& corpus, const KBStore& kb,
                                              const std::vector<const TableCellRecord*>& cells,
                                              std::size_t n_sentences, std::size_t negatives_per_positive) {
    std::vector<ElTrainingPair> out;
    for (const auto* cell : cells) {
        if (!cell->gold_is_inkb()) continue;
        const Entity* gold = kb.find_entity(*cell->gold_link);
        if (!gold) {
            throw NotFoundError("cell " + to_string(cell->key()) + " links to unknown entity " + *cell->gold_link);
        }
        ElTrainingPair pair;
        pair.cell = cell->key();
        pair.context = build_cell_context(*cell, corpus.document(cell->document_id), n_sentences);
        pair.gold_id = gold->id;
        for (const auto* neg : mine_negatives(kb, cell->raw_text, gold->kind, gold->id, negatives_per_positive)) {
            pair.negative_ids.push_back(neg->id);
        }
        out.push_back(std::move(pair));
    }
    return out;
}

DenseRetriever train_dr(const KBStore& kb, const std::vector<ElTrainingPair>& pairs, const DrOptions& options,
                        TrainingLog* log) {
    std::vector<Triplet> triplets;
    for (const auto& p : pairs) {
        const auto anchor = serialize_cell(p.context, options.max_length);
        const auto positive = serialize_entity(kb.entity(p.gold_id), options.max_length);
        for (const auto& neg : p.negative_ids) {
            triplets.push_back({anchor, positive, serialize_entity(kb.entity(neg), options.max_length)});
        }
    }
    if (triplets.empty()) throw Error("train_dr: no inKB training cells with negatives");
    const auto seed = options.training.seed;
    BiEncoder model(EncoderModel(make_backend(options.backend, seed), seed, options.max_length),
                    EncoderModel(make_backend(options.backend, seed + 1), seed + 1, options.max_length));
    auto trained = fit_triplet(model, triplets, options.training);
    if (log) *log = std::move(trained);
    return DenseRetriever(std::move(model));
}

DenseRetriever train_dr(const Corpus& corpus, const FoldSplit& fold, const KBStore& kb, const DrOptions& options,
                        TrainingLog* log) {
    const auto pairs = el_training_pairs(corpus, kb, corpus.cells_in_topics(fold.train_topics), options.n_sentences,
                                         static_cast<std::size_t>(options.training.negatives_per_positive));
    return train_dr(kb, pairs, options, log);
}

namespace {

OrderedJson optional_rank(const std::optional<std::size_t>& r) { return r ? OrderedJson(*r) : OrderedJson(nullptr); }

OrderedJson list_json(const CandidateList& list) {
    OrderedJson arr = OrderedJson::array();
    for (const auto& e : list.entries) {
        OrderedJson j;
        j["entity_id"] = e.entity_id;
        j["rank"] = e.rank;
        j["score"] = e.score ? OrderedJson(*e.score) : OrderedJson(nullptr);
        arr.push_back(std::move(j));
    }
    return arr;
}

CandidateList parse_list(const Json& arr, RetrievalSource source) {
    CandidateList list{source, {}};
    for (const auto& j : arr) {
        CandidateEntry e{require_string(j, "entity_id"), static_cast<std::size_t>(require_int(j, "rank")),
                         std::nullopt};
        if (j.contains("score") && !j["score"].is_null()) e.score = j["score"].get<double>();
        list.entries.push_back(std::move(e));
    }
    return list;
}

std::optional<std::size_t> parse_rank(const Json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::size_t>();
}

}  // namespace

OrderedJson candidate_set_json(const CandidateSet& set) {
    OrderedJson j;
    j["cell"] = cell_key_json(set.cell);
    j["K"] = set.k;
    j["candidates"] = OrderedJson::array();
    for (const auto& e : set.entries) {
        OrderedJson c;
        c["entity_id"] = e.entity_id;
        c["from_dr"] = e.from_dr;
        c["from_asr"] = e.from_asr;
        c["dr_rank"] = optional_rank(e.dr_rank);
        c["asr_rank"] = optional_rank(e.asr_rank);
        j["candidates"].push_back(std::move(c));
    }
    return j;
}

CandidateSet parse_candidate_set(const Json& j) {
    CandidateSet set;
    set.cell = parse_cell_key(j.at("cell"));
    set.k = j.at("K").get<std::size_t>();
    for (const auto& c : j.at("candidates")) {
        set.entries.push_back({require_string(c, "entity_id"), c.at("from_dr").get<bool>(),
                               c.at("from_asr").get<bool>(), parse_rank(c, "dr_rank"), parse_rank(c, "asr_rank")});
    }
    return set;
}

OrderedJson retrieval_json(const CellKey& cell, const CandidateList& dr, const CandidateList& asr) {
    OrderedJson j;
    j["cell"] = cell_key_json(cell);
    j["dr"] = list_json(dr);
    j["asr"] = list_json(asr);
    return j;
}

std::tuple<CellKey, CandidateList, CandidateList> parse_retrieval(const Json& j) {
    return {parse_cell_key(j.at("cell")), parse_list(j.at("dr"), RetrievalSource::dr),
            parse_list(j.at("asr"), RetrievalSource::asr)};
}

}  // namespace tablelink
