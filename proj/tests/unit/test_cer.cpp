// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tablelink/cer.hpp"
#include "tablelink/errors.hpp"

namespace tablelink {
namespace {

CandidateList dr_list(std::vector<std::string> ids) { return CandidateList::from_ids(RetrievalSource::dr, ids); }
CandidateList asr_list(std::vector<std::string> ids) { return CandidateList::from_ids(RetrievalSource::asr, ids); }

TEST(Interleave, Examples) {
    EXPECT_EQ(interleave(dr_list({"x", "y"}), asr_list({"a", "b"}), 4).ids(),
              (std::vector<std::string>{"a", "x", "b", "y"}));
    const auto both = interleave(dr_list({"x", "y"}), asr_list({"a", "x"}), 4);
    EXPECT_EQ(both.ids(), (std::vector<std::string>{"a", "x", "y"}));
    EXPECT_TRUE(both.entries[1].from_dr);
    EXPECT_TRUE(both.entries[1].from_asr);
    EXPECT_EQ(both.entries[1].dr_rank, 1u);
    EXPECT_EQ(both.entries[1].asr_rank, 2u);
    EXPECT_EQ(interleave(dr_list({}), asr_list({"a", "b", "c"}), 2).ids(), (std::vector<std::string>{"a", "b"}));
    EXPECT_TRUE(interleave(dr_list({"a"}), asr_list({"b"}), 0).entries.empty());
    EXPECT_EQ(interleave(dr_list({"x", "y"}), asr_list({"a", "b"}), 4, InterleaveOrder::dr_first).ids(),
              (std::vector<std::string>{"x", "a", "y", "b"}));
}

TEST(Interleave, PropertiesOverRandomInstances) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> dr, asr;
        for (std::size_t i = 0; i < rng() % 10; ++i) dr.push_back("e" + std::to_string(rng() % 12));
        for (std::size_t i = 0; i < rng() % 10; ++i) asr.push_back("e" + std::to_string(rng() % 12));
        // Candidate lists hold distinct ids.
        auto dedupe = [](std::vector<std::string>& v) {
            std::vector<std::string> out;
            for (auto& s : v) {
                if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
            }
            v = out;
        };
        dedupe(dr);
        dedupe(asr);
        const std::size_t k = rng() % 15;
        const auto set = interleave(dr_list(dr), asr_list(asr), k);
        std::vector<std::string> uni = dr;
        uni.insert(uni.end(), asr.begin(), asr.end());
        dedupe(uni);
        EXPECT_EQ(set.entries.size(), std::min(k, uni.size()));
        auto ids = set.ids();
        std::sort(ids.begin(), ids.end());
        EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
        for (const auto& id : ids) EXPECT_NE(std::find(uni.begin(), uni.end(), id), uni.end());
        // A smaller K yields a prefix.
        if (k > 0) {
            const auto smaller = interleave(dr_list(dr), asr_list(asr), k - 1).ids();
            const auto full = set.ids();
            EXPECT_TRUE(std::equal(smaller.begin(), smaller.end(), full.begin()));
        }
        std::vector<oracle::InterleavedEntry> got;
        for (const auto& e : set.entries) got.push_back({e.entity_id, e.from_dr, e.from_asr});
        EXPECT_EQ(got, oracle::interleave(dr, asr, k));
    }
}

TEST(Interleave, OrderNames) {
    EXPECT_EQ(parse_interleave_order("asr_first"), InterleaveOrder::asr_first);
    EXPECT_EQ(parse_interleave_order(to_string(InterleaveOrder::dr_first)), InterleaveOrder::dr_first);
    EXPECT_EQ(parse_interleave_order("sideways"), std::nullopt);
}

TEST(Recall, Examples) {
    CandidateSet a{{"d", "t", 0, 0}, 3, {{"e1", true, false, 1, std::nullopt}, {"e2", true, false, 2, std::nullopt}}};
    CandidateSet b{{"d", "t", 0, 1}, 3, {{"e3", true, false, 1, std::nullopt}}};
    const std::vector<CandidateSet> sets = {a, b};
    const std::vector<GoldLink> gold = {{a.cell, "e2"}, {b.cell, "e9"}, {{"d", "t", 0, 2}, std::string(kOutKB)}};
    EXPECT_DOUBLE_EQ(recall_at_k(sets, gold, 2), 0.5);
    EXPECT_DOUBLE_EQ(recall_at_k(sets, gold, 1), 0.0);
    EXPECT_DOUBLE_EQ(recall_at_k(sets, gold, 0), 0.0);
    const std::vector<GoldLink> only_out = {{a.cell, std::string(kOutKB)}};
    EXPECT_DOUBLE_EQ(recall_at_k(sets, only_out, 5), 0.0);
    // A gold cell without any candidate set is a miss.
    const std::vector<GoldLink> unseen = {{{"d", "t", 9, 9}, "e1"}, {a.cell, "e1"}};
    EXPECT_DOUBLE_EQ(recall_at_k(sets, unseen, 5), 0.5);
}

TEST(Recall, TruncateList) {
    const auto set = truncate_list(dr_list({"a", "b", "c"}), 2);
    EXPECT_EQ(set.ids(), (std::vector<std::string>{"a", "b"}));
    EXPECT_TRUE(set.entries[0].from_dr);
}

TEST(Asr, ConcatenatesFiltersAndDedupes) {
    const KBStore kb({{"d1", EntityKind::dataset, "D1", "Dataset one", ""},
                      {"d2", EntityKind::dataset, "D2", "Dataset two", ""},
                      {"m1", EntityKind::method, "M1", "Method one", ""}},
                     {{"P1", "Paper 1", "", std::nullopt, std::nullopt}, {"P2", "Paper 2", "", std::nullopt, std::nullopt},
                      {"P3", "Paper 3", "", std::nullopt, std::nullopt}},
                     {{"P1", "d1"}, {"P2", "d2"}, {"P2", "m1"}, {"P3", "d1"}, {"P3", "d2"}});
    auto ranked = [](std::vector<std::optional<std::string>> papers) {
        SourceRanking r;
        int i = 1;
        for (auto& p : papers) r.push_back({SourceCandidate::reference(i++), 1.0 / i, p});
        return r;
    };
    EXPECT_EQ(asr_candidates(ranked({"P1", "P2"}), kb, CellType::dataset).ids(), (std::vector<std::string>{"d1", "d2"}));
    EXPECT_EQ(asr_candidates(ranked({"P1", "P3"}), kb, CellType::dataset).ids(), (std::vector<std::string>{"d1", "d2"}));
    EXPECT_EQ(asr_candidates(ranked({"P1", "P2"}), kb, CellType::method).ids(), (std::vector<std::string>{"m1"}));
    EXPECT_EQ(asr_candidates(ranked({"P2"}), kb, CellType::dataset_and_metric).ids(), (std::vector<std::string>{"d2"}));
    EXPECT_TRUE(asr_candidates(ranked({std::nullopt, std::nullopt}), kb, CellType::dataset).entries.empty());
    EXPECT_TRUE(asr_candidates(ranked({"P1"}), kb, CellType::metric).entries.empty());
    const auto list = asr_candidates(ranked({"P1", "P2"}), kb, CellType::dataset);
    EXPECT_EQ(list.entries[1].rank, 2u);
    EXPECT_TRUE(list.entries[1].score.has_value());
}

class FixedDense final : public DenseEmbedder {
public:
    explicit FixedDense(std::map<std::string, Vector> e) : e_(std::move(e)) {}
    Vector embed_cell(const CellContext&) const override { return Vector{{0.0, 0.0}}; }
    Vector embed_entity(const Entity& entity) const override { return e_.at(entity.id); }

private:
    std::map<std::string, Vector> e_;
};

TEST(Dense, MatchesBruteForceDistanceSort) {
    std::vector<Entity> entities;
    std::map<std::string, Vector> vecs;
    std::mt19937_64 rng(23);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 5; ++i) {
        const std::string id = "e" + std::to_string(i);
        entities.push_back({id, i % 2 ? EntityKind::method : EntityKind::dataset, id, id, ""});
        vecs[id] = Vector{{n(rng), n(rng)}};
    }
    vecs["e4"] = vecs["e2"];  // exact tie, broken by id
    const KBStore kb(entities, {}, {});
    const FixedDense embedder(vecs);
    const EntityIndex index(embedder, kb);
    const Vector q{{0.1, -0.2}};
    std::vector<std::pair<double, std::string>> brute;
    for (const auto& [id, v] : vecs) brute.push_back({(v - q).norm(), id});
    std::sort(brute.begin(), brute.end());
    const auto got = index.search(q, std::nullopt, 5);
    ASSERT_EQ(got.entries.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(got.entries[i].entity_id, brute[i].second);
        EXPECT_DOUBLE_EQ(*got.entries[i].score, brute[i].first);
        EXPECT_EQ(got.entries[i].rank, i + 1);
    }
    EXPECT_EQ(index.search(q, std::nullopt, 1).ids(), std::vector<std::string>{brute[0].second});
    for (const auto& e : index.search(q, EntityKind::method, 5).entries) EXPECT_EQ(kb.entity(e.entity_id).kind, EntityKind::method);
}

TEST(Dense, KindFilterOnMethodsOnlyKb) {
    const KBStore kb({{"m1", EntityKind::method, "A", "A", ""}}, {}, {});
    const FixedDense embedder({{"m1", Vector{{1.0, 0.0}}}});
    const EntityIndex index(embedder, kb);
    EXPECT_TRUE(dr_candidates(embedder, fixture::simple_context("x"), index, CellType::dataset, 5).entries.empty());
    EXPECT_EQ(dr_candidates(embedder, fixture::simple_context("x"), index, CellType::method, 5).entries.size(), 1u);
    EXPECT_TRUE(dr_candidates(embedder, fixture::simple_context("x"), index, CellType::other, 5).entries.empty());
}

TEST(Negatives, NeverGoldAndKindFiltered) {
    const auto kb = fixture::toy_kb();
    for (const auto& e : kb.entities()) {
        const auto negs = mine_negatives(kb, e.full_name, e.kind, e.id, 50);
        EXPECT_EQ(negs.size(), kb.num_entities(e.kind) - 1);
        for (const auto* n : negs) {
            EXPECT_NE(n->id, e.id);
            EXPECT_EQ(n->kind, e.kind);
        }
        const auto few = mine_negatives(kb, e.full_name, e.kind, e.id, 2);
        EXPECT_EQ(few.size(), 2u);
        EXPECT_EQ(few[0], negs[0]);
    }
}

TEST(TrainDr, OverfitsToyTask) {
    const auto kb = fixture::toy_kb();
    const auto pairs = fixture::toy_el_pairs(kb, 8);
    DrOptions options{{"stub", 32, 32}, {}, 2, 128};
    options.training.epochs = 50;
    options.training.batch_size = 8;
    options.training.learning_rate = 1e-2;
    options.training.triplet_margin = 2.0;
    options.training.seed = 1;
    const auto model = train_dr(kb, pairs, options);
    const EntityIndex index(model, kb);
    std::size_t hits = 0;
    for (const auto& p : pairs) {
        const auto top = index.search(model.embed_cell(p.context), kb.entity(p.gold_id).kind, 3).ids();
        hits += std::find(top.begin(), top.end(), p.gold_id) != top.end();
    }
    EXPECT_GE(hits, 8u);
    EXPECT_THROW(train_dr(kb, {}, options), Error);
}

TEST(ElPairs, OnlyInKbCellsWithKnownGold) {
    const auto corpus = load_corpus(fixture::data_dir() / "smoke" / "corpus");
    const auto kb = ingest_kb(fixture::data_dir() / "smoke" / "kb");
    std::vector<const TableCellRecord*> cells;
    for (const auto& c : corpus.cells()) cells.push_back(&c);
    const auto pairs = el_training_pairs(corpus, kb, cells, 2, 50);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].gold_id, "d-squad");
    EXPECT_EQ(pairs[0].negative_ids.size(), 2u);
    EXPECT_EQ(std::count(pairs[0].negative_ids.begin(), pairs[0].negative_ids.end(), "d-squad"), 0);

    auto broken = corpus.cells();
    broken[0].gold_link = "d-ghost";
    const Corpus bad(corpus.documents(), broken);
    std::vector<const TableCellRecord*> bad_cells;
    for (const auto& c : bad.cells()) bad_cells.push_back(&c);
    EXPECT_THROW(el_training_pairs(bad, kb, bad_cells, 2, 5), NotFoundError);
}

TEST(CerJson, RoundTrips) {
    const auto set = interleave(dr_list({"x", "y"}), asr_list({"a", "x"}), 3);
    auto with_cell = set;
    with_cell.cell = {"d", "t", 1, 1};
    const auto j = candidate_set_json(with_cell);
    EXPECT_EQ(j["K"], 3);
    EXPECT_TRUE(j["candidates"][0]["dr_rank"].is_null());
    const auto back = parse_candidate_set(Json::parse(j.dump()));
    EXPECT_EQ(back.cell, with_cell.cell);
    EXPECT_EQ(back.entries, with_cell.entries);

    CandidateList dr = dr_list({"x"});
    dr.entries[0].score = 0.25;
    const auto r = retrieval_json({"d", "t", 0, 0}, dr, asr_list({"a"}));
    const auto [cell, dr2, asr2] = parse_retrieval(Json::parse(r.dump()));
    EXPECT_EQ(dr2.entries, dr.entries);
    EXPECT_EQ(asr2.ids(), std::vector<std::string>{"a"});
}

}  // namespace
}  // namespace tablelink
