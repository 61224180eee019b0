// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tablelink/errors.hpp"
#include "tablelink/text.hpp"

namespace tablelink {

namespace {

std::vector<std::string> unique_terms(std::string_view query) {
    auto tokens = lexical_tokens(query);
    std::set<std::string> seen;
    std::vector<std::string> out;
    for (auto& t : tokens) {
        if (seen.insert(t).second) out.push_back(std::move(t));
    }
    return out;
}

std::vector<ScoredDoc> collect(const std::vector<double>& scores) {
    std::vector<ScoredDoc> out;
    for (std::size_t d = 0; d < scores.size(); ++d) {
        if (scores[d] > 0.0) out.push_back({d, scores[d]});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ScoredDoc& a, const ScoredDoc& b) { return a.score > b.score; });
    return out;
}

}  // namespace

void Bm25Params::validate() const {
    if (!(k1 > 0.0)) throw ConfigError("bm25: k1 must be positive");
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("bm25: b must lie in [0,1]");
}

double bm25_idf(std::size_t num_docs, std::size_t doc_freq) {
    const double n = static_cast<double>(num_docs);
    const double df = static_cast<double>(doc_freq);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

Bm25Collection::Bm25Collection(std::span<const std::string> documents, Bm25Params params)
    : params_(params) {
    params_.validate();
    doc_lengths_.reserve(documents.size());
    double total = 0.0;
    for (std::size_t d = 0; d < documents.size(); ++d) {
        const auto tokens = lexical_tokens(documents[d]);
        doc_lengths_.push_back(tokens.size());
        total += static_cast<double>(tokens.size());
        std::unordered_map<std::string, std::size_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (auto& [term, count] : tf) postings_[term].push_back({d, count});
    }
    for (auto& [term, list] : postings_) {
        std::sort(list.begin(), list.end(), [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
    }
    avg_length_ = documents.empty() ? 0.0 : total / static_cast<double>(documents.size());
}

std::vector<ScoredDoc> Bm25Collection::search(std::string_view query) const {
    std::vector<double> scores(doc_lengths_.size(), 0.0);
    for (const auto& term : unique_terms(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double idf = bm25_idf(doc_lengths_.size(), it->second.size());
        for (const auto& p : it->second) {
            const double tf = static_cast<double>(p.tf);
            const double len_ratio = avg_length_ > 0.0 ? static_cast<double>(doc_lengths_[p.doc]) / avg_length_ : 0.0;
            const double norm = params_.k1 * (1.0 - params_.b + params_.b * len_ratio);
            scores[p.doc] += idf * tf * (params_.k1 + 1.0) / (tf + norm);
        }
    }
    return collect(scores);
}

FieldedBm25Index::FieldedBm25Index(std::vector<double> field_weights, Bm25Params params)
    : weights_(std::move(field_weights)), params_(params), length_sums_(weights_.size(), 0.0) {
    params_.validate();
    if (weights_.empty()) throw ConfigError("bm25f: at least one field required");
    for (double w : weights_) {
        if (!(w > 0.0)) throw ConfigError("bm25f: field weights must be positive");
    }
}

void FieldedBm25Index::add_document(const std::vector<std::string>& fields) {
    if (fields.size() != weights_.size()) throw Error("bm25f: field count mismatch");
    const std::size_t doc = field_lengths_.size();
    std::vector<std::size_t> lengths(fields.size());
    std::unordered_map<std::string, std::vector<std::size_t>> tf;
    for (std::size_t f = 0; f < fields.size(); ++f) {
        const auto tokens = lexical_tokens(fields[f]);
        lengths[f] = tokens.size();
        length_sums_[f] += static_cast<double>(tokens.size());
        for (const auto& t : tokens) {
            auto& counts = tf[t];
            if (counts.empty()) counts.assign(fields.size(), 0);
            ++counts[f];
        }
    }
    field_lengths_.push_back(std::move(lengths));
    for (auto& [term, counts] : tf) postings_[term].push_back({doc, std::move(counts)});
}

std::vector<ScoredDoc> FieldedBm25Index::search(std::string_view query) const {
    const std::size_t n = field_lengths_.size();
    std::vector<double> scores(n, 0.0);
    if (n == 0) return {};
    std::vector<double> avg(weights_.size());
    for (std::size_t f = 0; f < weights_.size(); ++f) avg[f] = length_sums_[f] / static_cast<double>(n);

    for (const auto& term : unique_terms(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double idf = bm25_idf(n, it->second.size());
        for (const auto& p : it->second) {
            double pseudo_tf = 0.0;
            for (std::size_t f = 0; f < weights_.size(); ++f) {
                if (p.tf[f] == 0) continue;
                const double ratio = static_cast<double>(field_lengths_[p.doc][f]) / avg[f];
                pseudo_tf += weights_[f] * static_cast<double>(p.tf[f]) / (1.0 - params_.b + params_.b * ratio);
            }
            scores[p.doc] += idf * pseudo_tf * (params_.k1 + 1.0) / (params_.k1 + pseudo_tf);
        }
    }
    return collect(scores);
}

}  // namespace tablelink
