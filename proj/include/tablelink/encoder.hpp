// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tablelink/context.hpp"

namespace tablelink {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using PooledVector = Eigen::VectorXd;

// Trainable tensor with its gradient accumulator and AdamW moments.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix first_moment;
    Matrix second_moment;
    bool decay = true;

    Parameter() = default;
    Parameter(std::string name, Matrix init, bool decay = true);

    void zero_grad() { grad.setZero(); }
};

struct TokenizedSequence {
    std::vector<std::uint64_t> ids;
    std::vector<SegmentTag> tags;
};

// Pretrained contextual encoder behind a fixed interface. Inference methods
// are const and thread-safe; backward() accumulates into parameter gradients.
class EncoderBackend {
public:
    struct Cache {
        virtual ~Cache() = default;
    };

    virtual ~EncoderBackend() = default;

    virtual std::string name() const = 0;
    virtual std::size_t embedding_dim() const = 0;
    virtual std::size_t hidden_dim() const = 0;

    virtual TokenizedSequence tokenize(const TaggedSequence& sequence) const = 0;
    // Word embeddings, one row per token.
    virtual Matrix embed(const TokenizedSequence& tokens) const = 0;
    // Last-layer token vectors for input embeddings x (rows = tokens).
    virtual Matrix forward(const Matrix& x, std::unique_ptr<Cache>* cache) const = 0;
    // Returns d loss / d x given d loss / d output.
    virtual Matrix backward(const Cache& cache, const Matrix& grad_output) = 0;

    virtual std::vector<Parameter*> parameters() = 0;
    virtual std::unique_ptr<EncoderBackend> clone() const = 0;
};

struct StubBackendOptions {
    std::size_t embedding_dim = 64;
    std::size_t hidden_dim = 64;
    std::uint64_t seed = 0;
};

// Deterministic desk-scale backend. Word embeddings are fixed pseudo-random
// vectors keyed by the hash of the lowercased token. Each token gets a
// parameter-free dot-product attention summary c_i of the other tokens, then
// one trainable linear layer with tanh maps [x_i ; c_i ; x_i * c_i] to the
// hidden size.
class StubBackend final : public EncoderBackend {
public:
    explicit StubBackend(StubBackendOptions options = {});

    std::string name() const override { return "stub"; }
    std::size_t embedding_dim() const override { return options_.embedding_dim; }
    std::size_t hidden_dim() const override { return options_.hidden_dim; }

    TokenizedSequence tokenize(const TaggedSequence& sequence) const override;
    Matrix embed(const TokenizedSequence& tokens) const override;
    Matrix forward(const Matrix& x, std::unique_ptr<Cache>* cache) const override;
    Matrix backward(const Cache& cache, const Matrix& grad_output) override;

    std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
    std::unique_ptr<EncoderBackend> clone() const override { return std::make_unique<StubBackend>(*this); }

    const StubBackendOptions& options() const noexcept { return options_; }

private:
    StubBackendOptions options_;
    Parameter weight_;  // hidden x 3*embedding
    Parameter bias_;    // hidden x 1
};

struct BackendSpec {
    std::string name = "stub";
    std::size_t embedding_dim = 64;
    std::size_t hidden_dim = 64;
};

// Environment variable naming the directory real backends load weights from.
inline constexpr const char* kModelCacheEnv = "TABLELINK_MODEL_CACHE";

// Throws ConfigError for a backend this build cannot provide.
std::unique_ptr<EncoderBackend> make_backend(const BackendSpec& spec, std::uint64_t seed);

// Backend plus a trainable segment-tag embedding added to every word embedding,
// mean-pooled over the last layer.
class EncoderModel {
public:
    struct Trace {
        TokenizedSequence tokens;
        Matrix output;
        std::unique_ptr<EncoderBackend::Cache> cache;
    };

    EncoderModel(std::unique_ptr<EncoderBackend> backend, std::uint64_t seed,
                 std::size_t max_length = kMaxSequenceLength);
    EncoderModel(const EncoderModel& other);
    EncoderModel& operator=(const EncoderModel& other);
    EncoderModel(EncoderModel&&) noexcept = default;
    EncoderModel& operator=(EncoderModel&&) noexcept = default;

    // Throws Error for sequences longer than max_length; truncation is the
    // caller's job.
    PooledVector encode(const TaggedSequence& sequence) const;
    std::vector<PooledVector> encode_batch(std::span<const TaggedSequence> sequences) const;

    PooledVector forward(const TaggedSequence& sequence, Trace& trace) const;
    void backward(const Trace& trace, const Vector& grad_pooled);

    std::vector<Parameter*> parameters();
    const Parameter& segment_table() const noexcept { return segment_table_; }
    Parameter& segment_table() noexcept { return segment_table_; }
    const EncoderBackend& backend() const noexcept { return *backend_; }
    std::size_t hidden_dim() const { return backend_->hidden_dim(); }
    std::size_t max_length() const noexcept { return max_length_; }

private:
    std::unique_ptr<EncoderBackend> backend_;
    Parameter segment_table_;  // one row per SegmentTag
    std::size_t max_length_;
};

// Linear output layer over the pooled vector.
class SequenceClassifier {
public:
    SequenceClassifier(EncoderModel encoder, std::size_t num_classes, std::uint64_t seed);

    Vector logits(const TaggedSequence& sequence) const;
    std::size_t num_classes() const noexcept { return static_cast<std::size_t>(weight_.value.rows()); }

    EncoderModel& encoder() noexcept { return encoder_; }
    const EncoderModel& encoder() const noexcept { return encoder_; }
    Parameter& weight() noexcept { return weight_; }
    Parameter& bias() noexcept { return bias_; }
    std::vector<Parameter*> parameters();

private:
    EncoderModel encoder_;
    Parameter weight_;
    Parameter bias_;
};

// Logistic output over a fused pair sequence (cross-encoder).
class PairScorer {
public:
    PairScorer(EncoderModel encoder, std::uint64_t seed);

    double logit(const TaggedSequence& fused) const;
    double probability(const TaggedSequence& fused) const;

    EncoderModel& encoder() noexcept { return encoder_; }
    const EncoderModel& encoder() const noexcept { return encoder_; }
    Parameter& weight() noexcept { return weight_; }
    Parameter& bias() noexcept { return bias_; }
    std::vector<Parameter*> parameters();

private:
    EncoderModel encoder_;
    Parameter weight_;
    Parameter bias_;
};

// Two separately parameterised towers: one for cells, one for entities.
class BiEncoder {
public:
    BiEncoder(EncoderModel query_tower, EncoderModel entity_tower);

    PooledVector embed_query(const TaggedSequence& sequence) const { return query_.encode(sequence); }
    PooledVector embed_entity(const TaggedSequence& sequence) const { return entity_.encode(sequence); }

    EncoderModel& query_tower() noexcept { return query_; }
    EncoderModel& entity_tower() noexcept { return entity_; }
    const EncoderModel& query_tower() const noexcept { return query_; }
    const EncoderModel& entity_tower() const noexcept { return entity_; }
    std::vector<Parameter*> parameters();

private:
    EncoderModel query_;
    EncoderModel entity_;
};

double sigmoid(double z) noexcept;

}  // namespace tablelink
