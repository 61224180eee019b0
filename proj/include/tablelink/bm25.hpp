// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tablelink {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    void validate() const;
};

// Non-negative IDF: ln(1 + (N - df + 0.5) / (df + 0.5)).
double bm25_idf(std::size_t num_docs, std::size_t doc_freq);

struct ScoredDoc {
    std::size_t doc = 0;
    double score = 0.0;
};

// Single-field Okapi BM25 over a small in-memory collection. Each distinct
// query term contributes once.
class Bm25Collection {
public:
    Bm25Collection() = default;
    Bm25Collection(std::span<const std::string> documents, Bm25Params params = {});

    // Documents with a positive score, ordered by score descending then by
    // document position.
    std::vector<ScoredDoc> search(std::string_view query) const;

    std::size_t size() const noexcept { return doc_lengths_.size(); }

private:
    struct Posting {
        std::size_t doc;
        std::size_t tf;
    };
    Bm25Params params_;
    std::vector<std::size_t> doc_lengths_;
    double avg_length_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

// BM25F over documents with a fixed number of weighted fields:
//   tf~(t,d) = sum_f w_f * tf_f(t,d) / (1 - b + b * len_f(d) / avglen_f)
//   score(q,d) = sum_{t in q} idf(t) * tf~ * (k1 + 1) / (k1 + tf~)
// where df counts documents containing t in any field.
class FieldedBm25Index {
public:
    FieldedBm25Index() = default;
    FieldedBm25Index(std::vector<double> field_weights, Bm25Params params);

    // fields.size() must equal the number of field weights.
    void add_document(const std::vector<std::string>& fields);

    std::vector<ScoredDoc> search(std::string_view query) const;

    std::size_t size() const noexcept { return field_lengths_.size(); }
    std::size_t num_fields() const noexcept { return weights_.size(); }

private:
    struct Posting {
        std::size_t doc;
        std::vector<std::size_t> tf;  // per field
    };
    std::vector<double> weights_;
    Bm25Params params_;
    std::vector<std::vector<std::size_t>> field_lengths_;  // doc -> field -> length
    std::vector<double> length_sums_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

}  // namespace tablelink
