// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "overfit.hpp"

#include <chrono>
#include <cstring>

#include "fixtures.hpp"
#include "tablelink/text.hpp"

namespace tablelink::fixture {

namespace {

constexpr std::size_t kToyNegatives = 8;

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void mix(std::uint64_t& h, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(bits));
    h ^= bits;
    h = splitmix64(h);
}

BackendSpec toy_backend() { return {"stub", 64, 64}; }

}  // namespace

TrainingConfig overfit_config(std::uint64_t seed, int epochs) {
    TrainingConfig c;
    c.epochs = epochs;
    c.batch_size = 8;
    c.learning_rate = 1e-2;
    c.warmup_fraction = 0.1;
    c.triplet_margin = 2.0;
    c.negatives_per_positive = static_cast<int>(kToyNegatives);
    c.seed = seed;
    return c;
}

OverfitResult overfit_ctc(std::uint64_t seed, int epochs) {
    Timer timer;
    const auto examples = toy_ctc_examples();
    CtcOptions options{toy_backend(), overfit_config(seed, epochs), 2, 128, true};
    const auto model = train_ctc(examples, options);
    OverfitResult r{"CTC", 0.0, 0.0, 0, "training accuracy"};
    std::size_t correct = 0;
    for (const auto& e : examples) {
        const auto scores = model.scores(e.context);
        for (double s : scores) mix(r.fingerprint, s);
        correct += argmax_cell_type(scores) == e.label;
    }
    r.performance = static_cast<double>(correct) / static_cast<double>(examples.size());
    r.seconds = timer.seconds();
    return r;
}

OverfitResult overfit_asm(std::uint64_t seed, int epochs) {
    Timer timer;
    const auto task = toy_asm_task();
    AsmOptions options{toy_backend(), overfit_config(seed, epochs), 2, 128};
    const auto model = train_asm(task.corpus, task.examples, options);
    OverfitResult r{"ASM", 0.0, 0.0, 0, "pair accuracy at 0.5"};
    std::size_t correct = 0, total = 0;
    for (const auto& ex : task.examples) {
        for (const auto& [candidate, entry] : source_candidates(task.corpus.document(ex.document_id))) {
            const double p = model.probability(ex.context, entry);
            mix(r.fingerprint, p);
            correct += (p >= 0.5) == ex.gold.contains(candidate);
            ++total;
        }
    }
    r.performance = static_cast<double>(correct) / static_cast<double>(total);
    r.seconds = timer.seconds();
    return r;
}

OverfitResult overfit_dr(std::uint64_t seed, int epochs) {
    Timer timer;
    const auto kb = toy_kb();
    const auto pairs = toy_el_pairs(kb, kToyNegatives);
    DrOptions options{toy_backend(), overfit_config(seed, epochs), 2, 128};
    const auto model = train_dr(kb, pairs, options);
    const EntityIndex index(model, kb);
    OverfitResult r{"DR", 0.0, 0.0, 0, "gold in top 3"};
    std::size_t hits = 0;
    for (const auto& p : pairs) {
        const auto list = index.search(model.embed_cell(p.context), kb.entity(p.gold_id).kind, 3);
        for (const auto& e : list.entries) mix(r.fingerprint, *e.score);
        for (const auto& e : list.entries) hits += e.entity_id == p.gold_id;
    }
    r.performance = static_cast<double>(hits) / static_cast<double>(pairs.size());
    r.seconds = timer.seconds();
    return r;
}

OverfitResult overfit_ed(std::uint64_t seed, int epochs) {
    Timer timer;
    const auto kb = toy_kb();
    const auto pairs = toy_el_pairs(kb, kToyNegatives);
    EdOptions options{toy_backend(), overfit_config(seed, epochs), 2, 128};
    const auto model = train_ed(kb, pairs, options);
    OverfitResult r{"ED", 0.0, 0.0, 0, "pair accuracy at 0.5"};
    std::size_t correct = 0, total = 0;
    for (const auto& p : pairs) {
        const double pos = model.probability(p.context, kb.entity(p.gold_id));
        mix(r.fingerprint, pos);
        correct += pos >= 0.5;
        ++total;
        for (const auto& n : p.negative_ids) {
            const double neg = model.probability(p.context, kb.entity(n));
            mix(r.fingerprint, neg);
            correct += neg < 0.5;
            ++total;
        }
    }
    r.performance = static_cast<double>(correct) / static_cast<double>(total);
    r.seconds = timer.seconds();
    return r;
}

}  // namespace tablelink::fixture
