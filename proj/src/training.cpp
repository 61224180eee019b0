// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "tablelink/errors.hpp"

namespace tablelink {

void TrainingConfig::validate() const {
    if (epochs <= 0) throw ConfigError("training: epochs must be positive");
    if (batch_size <= 0) throw ConfigError("training: batch_size must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("training: learning_rate must be positive");
    if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) throw ConfigError("training: warmup_fraction must lie in (0,1)");
    if (!(triplet_margin > 0.0)) throw ConfigError("training: triplet_margin must be positive");
    if (negatives_per_positive <= 0) throw ConfigError("training: negatives_per_positive must be positive");
    if (weight_decay < 0.0) throw ConfigError("training: weight_decay must be non-negative");
}

std::string TrainingConfig::to_string() const {
    std::ostringstream out;
    out.precision(17);
    out << "epochs=" << epochs << "\n"
        << "batch_size=" << batch_size << "\n"
        << "learning_rate=" << learning_rate << "\n"
        << "warmup_fraction=" << warmup_fraction << "\n"
        << "triplet_margin=" << triplet_margin << "\n"
        << "negatives_per_positive=" << negatives_per_positive << "\n"
        << "weight_decay=" << weight_decay << "\n"
        << "seed=" << seed << "\n";
    return out.str();
}

std::string TrainingLog::to_tsv() const {
    std::ostringstream out;
    out.precision(10);
    out << "step\tlearning_rate\tloss\n";
    for (const auto& s : steps) out << s.step << "\t" << s.learning_rate << "\t" << s.loss << "\n";
    return out.str();
}

std::size_t warmup_steps(std::size_t total_steps, double warmup_fraction) {
    const auto w = static_cast<std::size_t>(std::ceil(warmup_fraction * static_cast<double>(total_steps)));
    return std::clamp<std::size_t>(w, 1, std::max<std::size_t>(total_steps, 1));
}

double scheduled_learning_rate(std::size_t step, std::size_t total_steps, const TrainingConfig& config) {
    const std::size_t w = warmup_steps(total_steps, config.warmup_fraction);
    if (step < w) return config.learning_rate * static_cast<double>(step + 1) / static_cast<double>(w);
    const double remaining = static_cast<double>(total_steps - 1 - step);
    return config.learning_rate * remaining / static_cast<double>(total_steps - w);
}

AdamW::AdamW(std::vector<Parameter*> parameters, double weight_decay, double beta1, double beta2, double epsilon)
    : params_(std::move(parameters)), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void AdamW::zero_grad() {
    for (auto* p : params_) p->zero_grad();
}

void AdamW::step(double learning_rate) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (auto* p : params_) {
        p->first_moment = beta1_ * p->first_moment + (1.0 - beta1_) * p->grad;
        p->second_moment = beta2_ * p->second_moment + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
        if (p->decay && weight_decay_ > 0.0) p->value *= (1.0 - learning_rate * weight_decay_);
        p->value.array() -= learning_rate * (p->first_moment.array() / c1) /
                            ((p->second_moment.array() / c2).sqrt() + epsilon_);
    }
}

namespace {

// Shared mini-batch loop. per_example(i, scale) must accumulate gradients and
// return the example loss.
template <typename PerExample>
TrainingLog run_epochs(std::vector<Parameter*> params, std::size_t num_examples, const TrainingConfig& config,
                       PerExample&& per_example) {
    config.validate();
    const auto batch = static_cast<std::size_t>(config.batch_size);
    const std::size_t batches_per_epoch = (num_examples + batch - 1) / batch;
    const std::size_t total_steps = batches_per_epoch * static_cast<std::size_t>(config.epochs);

    AdamW optimizer(std::move(params), config.weight_decay);
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(num_examples);
    std::iota(order.begin(), order.end(), 0);

    TrainingLog log;
    log.steps.reserve(total_steps);
    std::size_t step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < num_examples; start += batch) {
            const std::size_t end = std::min(num_examples, start + batch);
            const double scale = 1.0 / static_cast<double>(end - start);
            optimizer.zero_grad();
            double loss = 0.0;
            for (std::size_t k = start; k < end; ++k) loss += per_example(order[k], scale);
            const double lr = scheduled_learning_rate(step, total_steps, config);
            optimizer.step(lr);
            log.steps.push_back({step, lr, loss * scale});
            ++step;
        }
    }
    return log;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

double accumulate_classifier_gradient(SequenceClassifier& model, const LabeledSequence& example, double scale) {
    EncoderModel::Trace trace;
    const Vector pooled = model.encoder().forward(example.sequence, trace);
    const Vector logits = model.weight().value * pooled + model.bias().value.col(0);
    const double max_logit = logits.maxCoeff();
    const Vector exps = (logits.array() - max_logit).exp().matrix();
    const double z = exps.sum();
    Vector grad = exps / z;
    const double loss = -(logits(static_cast<Eigen::Index>(example.label)) - max_logit - std::log(z));
    grad(static_cast<Eigen::Index>(example.label)) -= 1.0;
    grad *= scale;
    model.weight().grad.noalias() += grad * pooled.transpose();
    model.bias().grad.col(0) += grad;
    model.encoder().backward(trace, model.weight().value.transpose() * grad);
    return loss;
}

double accumulate_pairwise_gradient(PairScorer& model, const TaggedSequence& fused, double target, double scale) {
    EncoderModel::Trace trace;
    const Vector pooled = model.encoder().forward(fused, trace);
    const double z = (model.weight().value * pooled)(0) + model.bias().value(0, 0);
    const double loss = softplus(z) - target * z;
    const double g = (sigmoid(z) - target) * scale;
    model.weight().grad.row(0) += g * pooled.transpose();
    model.bias().grad(0, 0) += g;
    model.encoder().backward(trace, g * model.weight().value.row(0).transpose());
    return loss;
}

double triplet_loss(const Vector& anchor, const Vector& positive, const Vector& negative, double margin) {
    return std::max(0.0, (anchor - positive).norm() - (anchor - negative).norm() + margin);
}

double triplet_loss(const BiEncoder& model, const Triplet& triplet, double margin) {
    return triplet_loss(model.embed_query(triplet.anchor), model.embed_entity(triplet.positive),
                        model.embed_entity(triplet.negative), margin);
}

double accumulate_triplet_gradient(BiEncoder& model, const Triplet& triplet, double margin, double scale) {
    EncoderModel::Trace ta, tp, tn;
    const Vector a = model.query_tower().forward(triplet.anchor, ta);
    const Vector p = model.entity_tower().forward(triplet.positive, tp);
    const Vector n = model.entity_tower().forward(triplet.negative, tn);
    const Vector ap = a - p;
    const Vector an = a - n;
    const double d_ap = ap.norm();
    const double d_an = an.norm();
    const double loss = std::max(0.0, d_ap - d_an + margin);
    if (loss <= 0.0) return 0.0;
    // Subgradient 0 for a zero-length difference.
    const Vector u_ap = d_ap > 0.0 ? Vector(ap / d_ap) : Vector::Zero(ap.size());
    const Vector u_an = d_an > 0.0 ? Vector(an / d_an) : Vector::Zero(an.size());
    model.query_tower().backward(ta, scale * (u_ap - u_an));
    model.entity_tower().backward(tp, -scale * u_ap);
    model.entity_tower().backward(tn, scale * u_an);
    return loss;
}

TrainingLog fit_classifier(SequenceClassifier& model, std::span<const LabeledSequence> examples,
                           const TrainingConfig& config) {
    if (examples.empty()) throw Error("fit_classifier: no training examples");
    std::set<std::size_t> classes;
    for (const auto& e : examples) {
        if (e.label >= model.num_classes()) throw Error("fit_classifier: label outside the output layer");
        classes.insert(e.label);
    }
    if (classes.size() < 2) throw Error("fit_classifier: training data contains a single class");
    return run_epochs(model.parameters(), examples.size(), config, [&](std::size_t i, double scale) {
        return accumulate_classifier_gradient(model, examples[i], scale);
    });
}

TrainingLog fit_pairwise(PairScorer& model, std::span<const TaggedSequence> positives,
                         std::span<const TaggedSequence> negatives, const TrainingConfig& config) {
    if (positives.empty()) throw Error("fit_pairwise: no positive pairs");
    if (negatives.empty()) throw Error("fit_pairwise: no negative pairs");
    const std::size_t n_pos = positives.size();
    return run_epochs(model.parameters(), n_pos + negatives.size(), config, [&](std::size_t i, double scale) {
        return i < n_pos ? accumulate_pairwise_gradient(model, positives[i], 1.0, scale)
                         : accumulate_pairwise_gradient(model, negatives[i - n_pos], 0.0, scale);
    });
}

TrainingLog fit_triplet(BiEncoder& model, std::span<const Triplet> triplets, const TrainingConfig& config) {
    if (triplets.empty()) throw Error("fit_triplet: no triplets");
    return run_epochs(model.parameters(), triplets.size(), config, [&](std::size_t i, double scale) {
        return accumulate_triplet_gradient(model, triplets[i], config.triplet_margin, scale);
    });
}

}  // namespace tablelink
