// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

// Desk-scale acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "overfit.hpp"
#include "tablelink/bm25.hpp"
#include "tablelink/cer.hpp"
#include "tablelink/ed.hpp"
#include "tablelink/eval.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/kb_store.hpp"
#include "tablelink/pipeline.hpp"

namespace tl = tablelink;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("failed: " + what);
        }
    }
    void note(const std::string& what) { notes.push_back(what); }
};

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

tl::CellKey key(int col) { return {"doc", "tab", 0, col}; }

Outcome metric_oracles() {
    Outcome o;
    constexpr double tol = 1e-12;
    using tl::CellType;
    {
        const std::vector<tl::CtcGold> gold = {{key(0), CellType::dataset},
                                               {key(1), CellType::dataset},
                                               {key(2), CellType::method},
                                               {key(3), CellType::other}};
        const std::map<tl::CellKey, CellType> pred = {{key(0), CellType::dataset},
                                                      {key(1), CellType::method},
                                                      {key(2), CellType::method},
                                                      {key(3), CellType::other}};
        const auto r = tl::eval_ctc(pred, gold);
        const auto& d = r.per_class[static_cast<std::size_t>(CellType::dataset)];
        o.check(near(d.precision, 1.0, tol), "eval_ctc dataset precision = 1");
        o.check(near(d.recall, 0.5, tol), "eval_ctc dataset recall = 0.5");
        o.check(near(d.f1, 2.0 / 3.0, tol), "eval_ctc dataset F1 = 2/3");
        o.check(near(r.micro.f1, 0.75, tol), "eval_ctc micro F1 = 0.75");
    }
    {
        const std::string out(tl::kOutKB);
        const std::vector<tl::GoldLink> gold = {{key(0), out}, {key(1), out}, {key(2), "e1"}, {key(3), "e2"}};
        const std::map<tl::CellKey, std::string> pred = {{key(0), out}, {key(1), "e9"}, {key(2), "e1"}, {key(3), out}};
        const auto r = tl::eval_el(pred, gold);
        o.check(near(r.outkb.precision, 0.5, tol), "eval_el outKB precision = 0.5");
        o.check(near(r.outkb.recall, 0.5, tol), "eval_el outKB recall = 0.5");
        o.check(near(r.outkb.f1, 0.5, tol), "eval_el outKB F1 = 0.5");
        o.check(near(r.hit_at_1, 0.5, tol), "eval_el hit@1 = 0.5");
        o.check(near(r.accuracy, 0.5, tol), "eval_el accuracy = 0.5");
        o.check(r.oi_ratio && near(*r.oi_ratio, 1.0, tol), "eval_el O/I = 1");
    }
    {
        const std::vector<double> x3 = {1, 2, 3}, up = {2, 4, 6}, down = {6, 4, 2};
        const std::vector<double> x4 = {1, 2, 3, 4}, y4 = {1, 3, 2, 4};
        o.check(near(tl::pearson(x3, up), 1.0, tol), "pearson perfect linear = 1");
        o.check(near(tl::pearson(x3, down), -1.0, tol), "pearson perfect anti-linear = -1");
        o.check(near(tl::pearson(x4, y4), 0.8, tol), "pearson [1,2,3,4] vs [1,3,2,4] = 0.8");
    }
    {
        tl::CandidateSet a{key(0), 2, {{"e1", true, false, 1, std::nullopt}, {"e2", true, false, 2, std::nullopt}}};
        tl::CandidateSet b{key(1), 2, {{"e3", true, false, 1, std::nullopt}}};
        const std::vector<tl::CandidateSet> sets = {a, b};
        const std::vector<tl::GoldLink> gold = {{key(0), "e2"}, {key(1), "e9"}};
        o.check(near(tl::recall_at_k(sets, gold, 2), 0.5, tol), "recall@2 with one of two hits = 0.5");
        o.check(near(tl::recall_at_k(sets, gold, 0), 0.0, tol), "recall@0 = 0");
    }
    return o;
}

std::vector<std::string> random_ids(std::mt19937_64& rng, std::size_t universe, std::size_t max_len) {
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < universe; ++i) pool.push_back("e" + std::to_string(i));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::uniform_int_distribution<std::size_t>(0, std::min(max_len, universe))(rng));
    return pool;
}

Outcome interleaving() {
    Outcome o;
    std::mt19937_64 rng(20261018);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto dr = random_ids(rng, 15, 12);
        const auto asr = random_ids(rng, 15, 12);
        const auto k = std::uniform_int_distribution<std::size_t>(0, 20)(rng);
        const auto got = tl::interleave(tl::CandidateList::from_ids(tl::RetrievalSource::dr, dr),
                                        tl::CandidateList::from_ids(tl::RetrievalSource::asr, asr), k);
        const auto want = tl::oracle::interleave(dr, asr, k);
        std::vector<tl::oracle::InterleavedEntry> seen;
        for (const auto& e : got.entries) seen.push_back({e.entity_id, e.from_dr, e.from_asr});
        if (seen != want) ++mismatches;
    }
    o.check(mismatches == 0, std::to_string(mismatches) + " of 1000 instances differ from the reference");
    o.note("1000 randomized instances");
    return o;
}

std::string random_text(std::mt19937_64& rng, const std::vector<std::string>& vocab, std::size_t max_words) {
    const auto n = std::uniform_int_distribution<std::size_t>(0, max_words)(rng);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += (rng() % 5 == 0) ? ", " : " ";
        s += vocab[rng() % vocab.size()];
    }
    return s;
}

Outcome bm25_equivalence() {
    Outcome o;
    const std::vector<std::string> vocab = {"deep",    "Residual", "network", "BERT",   "dataset", "ImageNet",
                                            "of",      "the",      "model",   "COCO",   "v2",      "F1",
                                            "ResNet",  "learning", "graph",   "data-set", "naïve", "QA"};
    std::mt19937_64 rng(7);
    double worst = 0.0;
    int order_errors = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto n_docs = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
        std::vector<std::string> docs;
        std::vector<std::vector<std::string>> fielded;
        std::vector<tl::Entity> entities;
        for (std::size_t d = 0; d < n_docs; ++d) {
            docs.push_back(random_text(rng, vocab, 12));
            std::vector<std::string> f = {random_text(rng, vocab, 2), random_text(rng, vocab, 5),
                                          random_text(rng, vocab, 12)};
            char id[16];
            std::snprintf(id, sizeof(id), "e%03zu", d);
            entities.push_back({id, d % 2 ? tl::EntityKind::method : tl::EntityKind::dataset,
                                f[0].empty() ? "x" : f[0], f[1].empty() ? "x" : f[1], f[2]});
            // The store indexes the abbreviation it was given, with full_name
            // standing in for an empty one.
            fielded.push_back({entities.back().abbreviation, entities.back().full_name, f[2]});
        }
        const auto query = random_text(rng, vocab, 4);

        const tl::Bm25Collection collection(docs);
        const auto want = tl::oracle::bm25_scores(docs, query, 1.2, 0.75);
        std::vector<double> got(docs.size(), 0.0);
        for (const auto& hit : collection.search(query)) got[hit.doc] = hit.score;
        for (std::size_t d = 0; d < docs.size(); ++d) worst = std::max(worst, std::fabs(got[d] - want[d]));

        const tl::KBStore kb(entities, {}, {});
        const auto want_f = tl::oracle::bm25f_scores(fielded, {2.0, 3.0, 1.0}, query, 1.2, 0.75);
        const auto hits = kb.search_bm25f(query, std::nullopt, entities.size());
        std::vector<double> got_f(entities.size(), 0.0);
        for (const auto& h : hits) got_f[static_cast<std::size_t>(h.entity - kb.entities().data())] = h.score;
        for (std::size_t d = 0; d < entities.size(); ++d) worst = std::max(worst, std::fabs(got_f[d] - want_f[d]));
        std::size_t positive = 0;
        for (double s : want_f) positive += s > 0.0;
        if (hits.size() != positive) ++order_errors;
        for (std::size_t i = 1; i < hits.size(); ++i) {
            if (hits[i - 1].score < hits[i].score ||
                (hits[i - 1].score == hits[i].score && hits[i - 1].entity->id > hits[i].entity->id)) {
                ++order_errors;
            }
        }
    }
    std::ostringstream msg;
    msg << "max |score - reference| = " << worst << " over 200 corpora";
    o.note(msg.str());
    o.check(worst <= 1e-9, "BM25/BM25F scores within 1e-9");
    o.check(order_errors == 0, "hit lists hold exactly the positive-score documents in rank order");
    return o;
}

Outcome decision_rule() {
    Outcome o;
    std::mt19937_64 rng(99);
    const std::vector<double> grid = tl::default_threshold_grid();
    const std::vector<std::function<double(double)>> transforms = {
        [](double x) { return x * x; }, [](double x) { return std::sqrt(x); },
        [](double x) { return std::expm1(x); }, [](double x) { return 0.25 * x + 0.5; }};
    int flips = 0, count_violations = 0, argmax_changes = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const auto n = std::uniform_int_distribution<std::size_t>(0, 8)(rng);
        std::vector<tl::MatchScore> scores;
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse values so that ties occur.
            const double p = static_cast<double>(rng() % 21) / 20.0;
            scores.push_back({key(0), "e" + std::to_string(rng() % 12), p});
        }
        bool was_out = false;
        for (double tau : grid) {
            const bool out = tl::decide(key(0), scores, tau).is_outkb();
            if (was_out && !out) ++flips;
            was_out = out;
        }
        const auto base = tl::decide(key(0), scores, 0.0);
        for (const auto& f : transforms) {
            auto moved = scores;
            for (auto& s : moved) s.probability = f(s.probability);
            if (tl::decide(key(0), moved, 0.0).outcome != base.outcome) ++argmax_changes;
        }
    }
    // Corpus-level OUTKB count over a fixed population of score sets.
    std::vector<std::vector<tl::MatchScore>> population;
    for (int i = 0; i < 500; ++i) {
        std::vector<tl::MatchScore> s;
        for (std::size_t j = 0; j < rng() % 5; ++j) {
            s.push_back({key(i), "e" + std::to_string(j), std::uniform_real_distribution<double>(0, 1)(rng)});
        }
        population.push_back(std::move(s));
    }
    std::size_t prev = 0;
    for (double tau : grid) {
        std::size_t outs = 0;
        for (const auto& s : population) outs += tl::decide(key(0), s, tau).is_outkb();
        if (outs < prev) ++count_violations;
        prev = outs;
    }
    o.check(flips == 0, std::to_string(flips) + " OUTKB -> inKB flips as the threshold rose");
    o.check(count_violations == 0, "OUTKB count non-decreasing in the threshold");
    o.check(argmax_changes == 0, std::to_string(argmax_changes) + " argmax changes under increasing transforms");
    o.note("10000 randomized score sets");
    return o;
}

Outcome recall_properties() {
    Outcome o;
    std::mt19937_64 rng(5);
    int monotone_violations = 0, saturation_violations = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<tl::CandidateSet> sets;
        std::vector<tl::GoldLink> gold;
        for (int c = 0; c < 6; ++c) {
            const auto dr = random_ids(rng, 30, 15);
            const auto asr = random_ids(rng, 30, 15);
            const std::string g = rng() % 4 == 0 ? std::string(tl::kOutKB) : "e" + std::to_string(rng() % 40);
            auto set = tl::interleave(tl::CandidateList::from_ids(tl::RetrievalSource::dr, dr),
                                      tl::CandidateList::from_ids(tl::RetrievalSource::asr, asr), 100);
            set.cell = key(c);
            const bool in_lists = std::find(dr.begin(), dr.end(), g) != dr.end() ||
                                  std::find(asr.begin(), asr.end(), g) != asr.end();
            for (std::size_t k = 0; k <= 40; ++k) {
                auto small = tl::interleave(tl::CandidateList::from_ids(tl::RetrievalSource::dr, dr),
                                            tl::CandidateList::from_ids(tl::RetrievalSource::asr, asr), k);
                if (!in_lists && small.contains(g)) ++saturation_violations;
            }
            sets.push_back(std::move(set));
            gold.push_back({key(c), g});
        }
        double prev = 0.0;
        for (std::size_t k = 0; k <= 40; ++k) {
            const double r = tl::recall_at_k(sets, gold, k);
            if (r < prev) ++monotone_violations;
            prev = r;
        }
    }
    o.check(monotone_violations == 0, "recall@K non-decreasing in K");
    o.check(saturation_violations == 0, "gold absent from both lists never appears in the candidate set");
    o.note("500 randomized instances of 6 cells, K = 0..40");
    return o;
}

Outcome overfit_suite() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    constexpr int kEpochs = 50;
    using Runner = tl::fixture::OverfitResult (*)(std::uint64_t, int);
    for (Runner run : {&tl::fixture::overfit_ctc, &tl::fixture::overfit_asm, &tl::fixture::overfit_dr,
                       &tl::fixture::overfit_ed}) {
        const auto a = run(11, kEpochs);
        const auto b = run(11, kEpochs);
        std::ostringstream msg;
        msg << a.task << " " << a.metric << " = " << a.performance << " (" << a.seconds << " s)";
        o.note(msg.str());
        o.check(a.performance >= 0.95, a.task + " reaches 95% on its training set");
        o.check(a.fingerprint == b.fingerprint, a.task + " identical across two runs with the same seed");
    }
    const auto grad = tl::fixture::triplet_gradient_check(3);
    std::ostringstream g;
    g << "triplet gradient max relative error = " << grad.max_relative_error << " over " << grad.entries_checked
      << " entries";
    o.note(g.str());
    o.check(grad.max_relative_error < 1e-4, "triplet gradient matches central differences");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(seconds < 120.0, "suite runtime under 2 minutes");
    return o;
}

Outcome end_to_end_smoke() {
    Outcome o;
    const auto dir = tl::fixture::data_dir() / "smoke";
    const auto corpus = tl::load_corpus(dir / "corpus");
    const auto kb = tl::ingest_kb(dir / "kb");
    const tl::fixture::SmokeCellTypes ctc;
    const tl::fixture::SmokeSources sources;
    const tl::fixture::SmokeDense dense;
    const tl::fixture::SmokeEntities entities;
    std::vector<const tl::TableCellRecord*> cells;
    for (const auto& c : corpus.cells()) cells.push_back(&c);

    const std::string expected = tl::read_text_file(dir / "expected_links.jsonl");
    tl::fixture::TempDir tmp;
    std::string first;
    for (int run = 0; run < 2; ++run) {
        const auto predictions = tl::predict_cells(corpus, kb, cells, {&ctc, &sources, &dense, &entities}, {});
        const auto out = tmp.path() / ("run" + std::to_string(run));
        tl::write_predictions(out, predictions);
        const auto links = tl::read_text_file(out / tl::kLinksFile);
        if (run == 0) {
            first = links;
            o.check(links == expected, "links file byte-identical to expected_links.jsonl");
            bool empty_is_out = false;
            for (const auto& p : predictions) {
                if (p.candidates && p.candidates->entries.empty()) {
                    empty_is_out = p.link && p.link->is_outkb() && p.link->top_probability == 0.0;
                }
            }
            o.check(empty_is_out, "cell with an empty candidate set is OUTKB");
        } else {
            o.check(links == first, "second run identical");
        }
    }
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
        double budget_seconds;
    };
    const std::vector<Criterion> criteria = {
        {1, "metric oracles (eval_ctc, eval_el, pearson, recall@K)", &metric_oracles, 1.0},
        {2, "interleaving matches brute-force reference", &interleaving, 0.0},
        {3, "BM25/BM25F equal naive reference within 1e-9", &bm25_equivalence, 0.0},
        {4, "decision rule monotonicity and argmax invariance", &decision_rule, 0.0},
        {5, "recall@K monotonicity and saturation", &recall_properties, 0.0},
        {6, "stub-backend overfit suite and triplet gradient check", &overfit_suite, 120.0},
        {7, "end-to-end smoke with fixture scorers", &end_to_end_smoke, 0.0},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.notes.push_back(std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0.0 && seconds >= c.budget_seconds) {
            o.pass = false;
            o.notes.push_back("exceeded the " + std::to_string(c.budget_seconds) + " s budget");
        }
        std::printf("%s  criterion %d: %s  [%.3f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds);
        for (const auto& n : o.notes) std::printf("      %s\n", n.c_str());
        failures += !o.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
