// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/encoder.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include "tablelink/errors.hpp"
#include "tablelink/text.hpp"

namespace tablelink {

namespace {

Matrix random_normal(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
    }
    return m;
}

struct StubCache final : EncoderBackend::Cache {
    Matrix x;       // n x d
    Matrix attn;    // n x n, zero diagonal, rows sum to 1 (0 for n = 1)
    Matrix mixed;   // n x d
    Matrix output;  // n x h, tanh activations
};

}  // namespace

Parameter::Parameter(std::string name_, Matrix init, bool decay_)
    : name(std::move(name_)),
      value(std::move(init)),
      grad(Matrix::Zero(value.rows(), value.cols())),
      first_moment(Matrix::Zero(value.rows(), value.cols())),
      second_moment(Matrix::Zero(value.rows(), value.cols())),
      decay(decay_) {}

double sigmoid(double z) noexcept {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Stub backend

StubBackend::StubBackend(StubBackendOptions options) : options_(options) {
    if (options_.embedding_dim == 0 || options_.hidden_dim == 0) throw ConfigError("stub backend: zero dimension");
    std::mt19937_64 rng(options_.seed ^ 0x5EEDBAC4E7ULL);
    const double fan = static_cast<double>(3 * options_.embedding_dim + options_.hidden_dim);
    weight_ = Parameter("backend.weight", random_normal(options_.hidden_dim, 3 * options_.embedding_dim, std::sqrt(2.0 / fan), rng));
    bias_ = Parameter("backend.bias", Matrix::Zero(options_.hidden_dim, 1), false);
}

TokenizedSequence StubBackend::tokenize(const TaggedSequence& sequence) const {
    TokenizedSequence out;
    out.ids.reserve(sequence.size());
    for (const auto& token : sequence.tokens) out.ids.push_back(fnv1a64(to_lower(token)));
    out.tags = sequence.segment_tags;
    return out;
}

Matrix StubBackend::embed(const TokenizedSequence& tokens) const {
    const auto d = static_cast<Eigen::Index>(options_.embedding_dim);
    Matrix x(static_cast<Eigen::Index>(tokens.ids.size()), d);
    const double scale = std::sqrt(3.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        std::uint64_t state = tokens.ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j) {
            const double u = static_cast<double>(splitmix64(state) >> 11) * (1.0 / 9007199254740992.0);
            x(i, j) = (2.0 * u - 1.0) * scale;
        }
    }
    return x;
}

Matrix StubBackend::forward(const Matrix& x, std::unique_ptr<Cache>* cache) const {
    const Eigen::Index n = x.rows();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(x.cols()));
    Matrix scores = (x * x.transpose()) * inv_sqrt_d;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (n == 1) {
            scores(i, i) = 0.0;
            continue;
        }
        scores(i, i) = -std::numeric_limits<double>::infinity();
        const double m = scores.row(i).maxCoeff();
        scores.row(i) = (scores.row(i).array() - m).exp().matrix();
        scores.row(i) /= scores.row(i).sum();
    }
    Matrix mixed = scores * x;
    Matrix u(n, 3 * x.cols());
    u << x, mixed, x.cwiseProduct(mixed);
    Matrix z = u * weight_.value.transpose();
    z.rowwise() += bias_.value.col(0).transpose();
    Matrix out = z.array().tanh().matrix();
    if (cache) {
        auto c = std::make_unique<StubCache>();
        c->x = x;
        c->attn = std::move(scores);
        c->mixed = std::move(mixed);
        c->output = out;
        *cache = std::move(c);
    }
    return out;
}

Matrix StubBackend::backward(const Cache& cache_base, const Matrix& grad_output) {
    const auto& cache = dynamic_cast<const StubCache&>(cache_base);
    const Eigen::Index d = cache.x.cols();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    const Matrix gz = (grad_output.array() * (1.0 - cache.output.array().square())).matrix();
    Matrix u(cache.x.rows(), 3 * d);
    u << cache.x, cache.mixed, cache.x.cwiseProduct(cache.mixed);
    weight_.grad.noalias() += gz.transpose() * u;
    bias_.grad.col(0) += gz.colwise().sum().transpose();

    const Matrix gu = gz * weight_.value;
    const Matrix gprod = gu.rightCols(d);
    Matrix gx = gu.leftCols(d) + gprod.cwiseProduct(cache.mixed);
    const Matrix gmixed = gu.middleCols(d, d) + gprod.cwiseProduct(cache.x);
    const Matrix& p = cache.attn;
    const Matrix gp = gmixed * cache.x.transpose();
    gx.noalias() += p.transpose() * gmixed;
    const Vector row_dot = (p.array() * gp.array()).rowwise().sum().matrix();
    Matrix ga = (p.array() * (gp.colwise() - row_dot).array()).matrix();
    gx.noalias() += ((ga + ga.transpose()) * cache.x) * inv_sqrt_d;
    return gx;
}

std::unique_ptr<EncoderBackend> make_backend(const BackendSpec& spec, std::uint64_t seed) {
    if (spec.name == "stub") {
        return std::make_unique<StubBackend>(StubBackendOptions{spec.embedding_dim, spec.hidden_dim, seed});
    }
    const char* cache = std::getenv(kModelCacheEnv);
    throw ConfigError("encoder backend '" + spec.name + "' is not available in this build (" + kModelCacheEnv + "=" +
                      (cache ? cache : "<unset>") + "); available: stub");
}

// ---------------------------------------------------------------------------
// Encoder model

EncoderModel::EncoderModel(std::unique_ptr<EncoderBackend> backend, std::uint64_t seed, std::size_t max_length)
    : backend_(std::move(backend)), max_length_(max_length) {
    if (!backend_) throw ConfigError("encoder model needs a backend");
    std::mt19937_64 rng(seed ^ 0x5E6E47ULL);
    segment_table_ = Parameter("segment_table", random_normal(kNumSegmentTags, backend_->embedding_dim(), 0.1, rng));
}

EncoderModel::EncoderModel(const EncoderModel& other)
    : backend_(other.backend_->clone()), segment_table_(other.segment_table_), max_length_(other.max_length_) {}

EncoderModel& EncoderModel::operator=(const EncoderModel& other) {
    if (this != &other) {
        backend_ = other.backend_->clone();
        segment_table_ = other.segment_table_;
        max_length_ = other.max_length_;
    }
    return *this;
}

PooledVector EncoderModel::forward(const TaggedSequence& sequence, Trace& trace) const {
    sequence.validate();
    if (sequence.size() > max_length_) {
        throw Error("sequence of " + std::to_string(sequence.size()) + " tokens exceeds the maximum length " +
                    std::to_string(max_length_));
    }
    trace.tokens = backend_->tokenize(sequence);
    Matrix x = backend_->embed(trace.tokens);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x.row(i) += segment_table_.value.row(static_cast<Eigen::Index>(trace.tokens.tags[static_cast<std::size_t>(i)]));
    }
    trace.output = backend_->forward(x, &trace.cache);
    return trace.output.colwise().mean().transpose();
}

PooledVector EncoderModel::encode(const TaggedSequence& sequence) const {
    Trace trace;
    return forward(sequence, trace);
}

std::vector<PooledVector> EncoderModel::encode_batch(std::span<const TaggedSequence> sequences) const {
    std::vector<PooledVector> out;
    out.reserve(sequences.size());
    for (const auto& s : sequences) out.push_back(encode(s));
    return out;
}

void EncoderModel::backward(const Trace& trace, const Vector& grad_pooled) {
    const auto n = trace.output.rows();
    Matrix grad_out = (grad_pooled / static_cast<double>(n)).transpose().replicate(n, 1);
    const Matrix gx = backend_->backward(*trace.cache, grad_out);
    for (Eigen::Index i = 0; i < gx.rows(); ++i) {
        segment_table_.grad.row(static_cast<Eigen::Index>(trace.tokens.tags[static_cast<std::size_t>(i)])) += gx.row(i);
    }
}

std::vector<Parameter*> EncoderModel::parameters() {
    auto params = backend_->parameters();
    params.push_back(&segment_table_);
    return params;
}

// ---------------------------------------------------------------------------
// Heads

SequenceClassifier::SequenceClassifier(EncoderModel encoder, std::size_t num_classes, std::uint64_t seed)
    : encoder_(std::move(encoder)) {
    if (num_classes < 2) throw ConfigError("classifier needs at least two classes");
    std::mt19937_64 rng(seed ^ 0xC1A55ULL);
    const auto h = encoder_.hidden_dim();
    weight_ = Parameter("head.weight", random_normal(num_classes, h, 1.0 / std::sqrt(static_cast<double>(h)), rng));
    bias_ = Parameter("head.bias", Matrix::Zero(static_cast<Eigen::Index>(num_classes), 1), false);
}

Vector SequenceClassifier::logits(const TaggedSequence& sequence) const {
    return weight_.value * encoder_.encode(sequence) + bias_.value.col(0);
}

std::vector<Parameter*> SequenceClassifier::parameters() {
    auto params = encoder_.parameters();
    params.push_back(&weight_);
    params.push_back(&bias_);
    return params;
}

PairScorer::PairScorer(EncoderModel encoder, std::uint64_t seed) : encoder_(std::move(encoder)) {
    std::mt19937_64 rng(seed ^ 0x9A1ULL);
    const auto h = encoder_.hidden_dim();
    weight_ = Parameter("head.weight", random_normal(1, h, 1.0 / std::sqrt(static_cast<double>(h)), rng));
    bias_ = Parameter("head.bias", Matrix::Zero(1, 1), false);
}

double PairScorer::logit(const TaggedSequence& fused) const {
    return (weight_.value * encoder_.encode(fused))(0) + bias_.value(0, 0);
}

double PairScorer::probability(const TaggedSequence& fused) const {
    return sigmoid(logit(fused));
}

std::vector<Parameter*> PairScorer::parameters() {
    auto params = encoder_.parameters();
    params.push_back(&weight_);
    params.push_back(&bias_);
    return params;
}

BiEncoder::BiEncoder(EncoderModel query_tower, EncoderModel entity_tower)
    : query_(std::move(query_tower)), entity_(std::move(entity_tower)) {
    if (query_.hidden_dim() != entity_.hidden_dim()) throw ConfigError("bi-encoder towers differ in hidden size");
}

std::vector<Parameter*> BiEncoder::parameters() {
    auto params = query_.parameters();
    for (auto* p : entity_.parameters()) params.push_back(p);
    return params;
}

}  // namespace tablelink
