// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tablelink/ctc.hpp"
#include "tablelink/errors.hpp"

namespace tablelink {

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace

ClassMetrics ClassMetrics::from_counts(std::string label, std::size_t tp, std::size_t fp, std::size_t fn) {
    ClassMetrics m;
    m.label = std::move(label);
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.support = tp + fn;
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

CtcReport eval_ctc(const std::map<CellKey, CellType>& predictions, std::span<const CtcGold> gold) {
    std::array<std::size_t, kNumCellTypes> tp{}, fp{}, fn{};
    for (const auto& [key, truth] : gold) {
        auto it = predictions.find(key);
        if (it == predictions.end()) throw Error("eval_ctc: no prediction for cell " + to_string(key));
        const auto g = static_cast<std::size_t>(truth);
        const auto p = static_cast<std::size_t>(it->second);
        if (g == p) {
            ++tp[g];
        } else {
            ++fn[g];
            ++fp[p];
        }
    }
    CtcReport r;
    r.cells = gold.size();
    std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
    for (std::size_t i = 0; i < kNumCellTypes; ++i) {
        r.per_class.push_back(ClassMetrics::from_counts(std::string(to_string(kCellTypes[i])), tp[i], fp[i], fn[i]));
        tp_all += tp[i];
        fp_all += fp[i];
        fn_all += fn[i];
    }
    r.micro = ClassMetrics::from_counts("micro", tp_all, fp_all, fn_all);
    return r;
}

ElReport eval_el(const std::map<CellKey, std::string>& decisions, std::span<const GoldLink> gold) {
    ElReport r;
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& g : gold) {
        auto it = decisions.find(g.cell);
        if (it == decisions.end()) throw Error("eval_el: no decision for cell " + to_string(g.cell));
        const bool pred_out = it->second == kOutKB;
        ++r.cells;
        if (pred_out) ++r.predicted_outkb;
        if (g.is_outkb()) {
            ++r.gold_outkb;
            pred_out ? ++tp : ++fn;
        } else {
            ++r.gold_inkb;
            if (pred_out) ++fp;
            if (it->second == g.link) ++r.hits;
        }
    }
    r.outkb = ClassMetrics::from_counts("outKB", tp, fp, fn);
    r.hit_at_1 = ratio(r.hits, r.gold_inkb);
    r.accuracy = ratio(tp + r.hits, r.cells);
    if (r.gold_inkb > 0) r.oi_ratio = ratio(r.gold_outkb, r.gold_inkb);
    return r;
}

AsmReport eval_asm(const std::map<CellKey, SourceRanking>& rankings, std::span<const AsmGold> gold,
                   double threshold) {
    AsmReport r;
    double rr_sum = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& [key, sources] : gold) {
        auto it = rankings.find(key);
        if (it == rankings.end()) throw Error("eval_asm: no ranking for cell " + to_string(key));
        ++r.cells;
        const auto& ranking = it->second;
        if (!sources.empty()) {
            ++r.ranked_cells;
            for (std::size_t i = 0; i < ranking.size(); ++i) {
                if (sources.contains(ranking[i].candidate)) {
                    rr_sum += 1.0 / static_cast<double>(i + 1);
                    break;
                }
            }
        }
        for (const auto& s : ranking) {
            const bool predicted = s.probability >= threshold;
            const bool truth = sources.contains(s.candidate);
            if (predicted && truth) ++tp;
            if (predicted && !truth) ++fp;
            if (!predicted && truth) ++fn;
        }
    }
    r.mrr = r.ranked_cells == 0 ? 0.0 : rr_sum / static_cast<double>(r.ranked_cells);
    r.at_threshold = ClassMetrics::from_counts("attributed", tp, fp, fn);
    return r;
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    grid.push_back(1.0 + 1e-9);
    return grid;
}

std::vector<SweepRow> sweep_thresholds(const std::map<CellKey, std::vector<MatchScore>>& scores,
                                       std::span<const GoldLink> gold, std::span<const double> grid) {
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    const std::vector<MatchScore> none;
    for (double tau : grid) {
        std::map<CellKey, std::string> decisions;
        for (const auto& g : gold) {
            auto it = scores.find(g.cell);
            decisions[g.cell] = decide(g.cell, it == scores.end() ? none : it->second, tau).outcome;
        }
        rows.push_back({tau, eval_el(decisions, gold)});
    }
    return rows;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("pearson: inputs differ in length");
    if (x.size() < 2) throw Error("pearson: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<RecallPoint> recall_curve(std::span<const RetrievalRecord> retrievals, std::span<const GoldLink> gold,
                                      std::span<const std::size_t> ks, InterleaveOrder order) {
    std::size_t k_max = 0;
    for (auto k : ks) k_max = std::max(k_max, k);
    std::vector<CandidateSet> dr, asr, combined;
    for (const auto& rec : retrievals) {
        dr.push_back(truncate_list(rec.dr, k_max));
        asr.push_back(truncate_list(rec.asr, k_max));
        combined.push_back(interleave(rec.dr, rec.asr, k_max, order));
        dr.back().cell = asr.back().cell = combined.back().cell = rec.cell;
    }
    std::vector<RecallPoint> out;
    for (auto k : ks) {
        out.push_back({k, recall_at_k(dr, gold, k), recall_at_k(asr, gold, k), recall_at_k(combined, gold, k)});
    }
    return out;
}

FoldMetrics evaluate_fold(const FoldEvalInput& input, std::span<const std::size_t> ks) {
    FoldMetrics m;
    m.topic = input.topic;
    m.ctc = eval_ctc(input.ctc_predictions, input.ctc_gold);
    m.source = eval_asm(input.rankings, input.asm_gold);
    m.el = eval_el(input.links, input.el_gold);
    m.recall = recall_curve(input.retrievals, input.el_gold, ks);
    return m;
}

MetricsReport build_report(std::span<const FoldEvalInput> folds, std::span<const std::size_t> ks) {
    MetricsReport report;
    FoldEvalInput pooled;
    pooled.topic = "micro";
    std::vector<double> oi, acc;
    for (const auto& f : folds) {
        report.folds.push_back(evaluate_fold(f, ks));
        const auto& el = report.folds.back().el;
        if (el.oi_ratio) {
            oi.push_back(*el.oi_ratio);
            acc.push_back(el.accuracy);
        }
        pooled.ctc_predictions.insert(f.ctc_predictions.begin(), f.ctc_predictions.end());
        pooled.ctc_gold.insert(pooled.ctc_gold.end(), f.ctc_gold.begin(), f.ctc_gold.end());
        pooled.rankings.insert(f.rankings.begin(), f.rankings.end());
        pooled.asm_gold.insert(pooled.asm_gold.end(), f.asm_gold.begin(), f.asm_gold.end());
        pooled.links.insert(f.links.begin(), f.links.end());
        pooled.el_gold.insert(pooled.el_gold.end(), f.el_gold.begin(), f.el_gold.end());
        pooled.retrievals.insert(pooled.retrievals.end(), f.retrievals.begin(), f.retrievals.end());
    }
    report.micro = evaluate_fold(pooled, ks);
    try {
        report.pearson_oi_accuracy = pearson(oi, acc);
    } catch (const Error&) {
        report.pearson_oi_accuracy.reset();
    }
    return report;
}

OrderedJson to_json(const ClassMetrics& m) {
    OrderedJson j;
    j["label"] = m.label;
    j["support"] = m.support;
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["fn"] = m.fn;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    return j;
}

OrderedJson to_json(const CtcReport& r) {
    OrderedJson j;
    j["cells"] = r.cells;
    j["per_class"] = OrderedJson::array();
    for (const auto& c : r.per_class) j["per_class"].push_back(to_json(c));
    j["micro"] = to_json(r.micro);
    return j;
}

OrderedJson to_json(const ElReport& r) {
    OrderedJson j;
    j["cells"] = r.cells;
    j["gold_outkb"] = r.gold_outkb;
    j["gold_inkb"] = r.gold_inkb;
    j["predicted_outkb"] = r.predicted_outkb;
    j["hits"] = r.hits;
    j["outkb"] = to_json(r.outkb);
    j["hit_at_1"] = r.hit_at_1;
    j["accuracy"] = r.accuracy;
    j["oi_ratio"] = r.oi_ratio ? OrderedJson(*r.oi_ratio) : OrderedJson(nullptr);
    return j;
}

OrderedJson to_json(const AsmReport& r) {
    OrderedJson j;
    j["cells"] = r.cells;
    j["ranked_cells"] = r.ranked_cells;
    j["mrr"] = r.mrr;
    j["at_threshold"] = to_json(r.at_threshold);
    return j;
}

namespace {

OrderedJson fold_json(const FoldMetrics& f) {
    OrderedJson j;
    j["topic"] = f.topic;
    j["ctc"] = to_json(f.ctc);
    j["asm"] = to_json(f.source);
    j["el"] = to_json(f.el);
    j["recall_at_k"] = OrderedJson::array();
    for (const auto& p : f.recall) {
        OrderedJson e;
        e["k"] = p.k;
        e["dr"] = p.dr;
        e["asr"] = p.asr;
        e["combined"] = p.combined;
        j["recall_at_k"].push_back(std::move(e));
    }
    return j;
}

void fold_text(std::ostringstream& out, const FoldMetrics& f) {
    out << "== " << f.topic << " ==\n";
    out << "CTC (" << f.ctc.cells << " cells)\n";
    out << "  class                P       R       F1      support\n";
    for (const auto& c : f.ctc.per_class) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "  %-20s %-7s %-7s %-7s %zu\n", c.label.c_str(), fixed(c.precision).c_str(),
                      fixed(c.recall).c_str(), fixed(c.f1).c_str(), c.support);
        out << buf;
    }
    out << "  micro F1 " << fixed(f.ctc.micro.f1) << "\n";
    out << "ASM (" << f.source.cells << " cells)  MRR " << fixed(f.source.mrr) << "  F1@0.5 "
        << fixed(f.source.at_threshold.f1) << "\n";
    const auto& el = f.el;
    out << "EL (" << el.cells << " cells, " << el.gold_outkb << " outKB / " << el.gold_inkb << " inKB)\n";
    out << "  outKB P " << fixed(el.outkb.precision) << "  R " << fixed(el.outkb.recall) << "  F1 "
        << fixed(el.outkb.f1) << "\n";
    out << "  inKB hit@1 " << fixed(el.hit_at_1) << "  accuracy " << fixed(el.accuracy) << "  O/I "
        << (el.oi_ratio ? fixed(*el.oi_ratio) : std::string("n/a")) << "\n";
    out << "  recall@K";
    for (const auto& p : f.recall) out << "  " << p.k << ":" << fixed(p.combined);
    out << "\n";
}

}  // namespace

std::string MetricsReport::to_text() const {
    std::ostringstream out;
    for (const auto& f : folds) {
        fold_text(out, f);
        out << "\n";
    }
    fold_text(out, micro);
    out << "\nPearson r (O/I vs accuracy): "
        << (pearson_oi_accuracy ? fixed(*pearson_oi_accuracy) : std::string("n/a")) << "\n";
    return out.str();
}

OrderedJson MetricsReport::to_json() const {
    OrderedJson j;
    j["folds"] = OrderedJson::array();
    for (const auto& f : folds) j["folds"].push_back(fold_json(f));
    j["micro"] = fold_json(micro);
    j["pearson_oi_accuracy"] = pearson_oi_accuracy ? OrderedJson(*pearson_oi_accuracy) : OrderedJson(nullptr);
    return j;
}

std::string MetricsReport::recall_csv() const {
    std::ostringstream out;
    out << "fold,k,dr,asr,combined\n";
    auto rows = [&](const FoldMetrics& f) {
        for (const auto& p : f.recall) {
            out << f.topic << "," << p.k << "," << fixed(p.dr, 6) << "," << fixed(p.asr, 6) << ","
                << fixed(p.combined, 6) << "\n";
        }
    };
    for (const auto& f : folds) rows(f);
    rows(micro);
    return out.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "threshold,predicted_outkb,outkb_precision,outkb_recall,outkb_f1,hit_at_1,accuracy\n";
    for (const auto& r : rows) {
        out << fixed(r.threshold, 9) << "," << r.report.predicted_outkb << "," << fixed(r.report.outkb.precision, 6)
            << "," << fixed(r.report.outkb.recall, 6) << "," << fixed(r.report.outkb.f1, 6) << ","
            << fixed(r.report.hit_at_1, 6) << "," << fixed(r.report.accuracy, 6) << "\n";
    }
    return out.str();
}

OrderedJson sweep_json(const std::vector<SweepRow>& rows) {
    OrderedJson arr = OrderedJson::array();
    for (const auto& r : rows) {
        OrderedJson j;
        j["threshold"] = r.threshold;
        j["el"] = to_json(r.report);
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace tablelink
