// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tablelink/encoder.hpp"

namespace tablelink {

struct TrainingConfig {
    int epochs = 2;
    int batch_size = 32;
    double learning_rate = 2e-5;
    double warmup_fraction = 0.1;  // linear warmup, then linear decay to 0
    double triplet_margin = 1.0;   // Euclidean
    int negatives_per_positive = 50;
    double weight_decay = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
    std::string to_string() const;  // "key=value" lines, stable order
};

struct StepRecord {
    std::size_t step = 0;
    double learning_rate = 0.0;
    double loss = 0.0;  // mean over the batch
};

struct TrainingLog {
    std::vector<StepRecord> steps;

    double final_loss() const { return steps.empty() ? 0.0 : steps.back().loss; }
    std::string to_tsv() const;
};

std::size_t warmup_steps(std::size_t total_steps, double warmup_fraction);

// Peak at step warmup-1, zero at the last step.
double scheduled_learning_rate(std::size_t step, std::size_t total_steps, const TrainingConfig& config);

// Adam with decoupled weight decay; parameters with decay=false skip decay.
class AdamW {
public:
    AdamW(std::vector<Parameter*> parameters, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
          double epsilon = 1e-8);

    void zero_grad();
    void step(double learning_rate);

private:
    std::vector<Parameter*> params_;
    double weight_decay_;
    double beta1_;
    double beta2_;
    double epsilon_;
    std::size_t t_ = 0;
};

struct LabeledSequence {
    TaggedSequence sequence;
    std::size_t label = 0;
};

struct Triplet {
    TaggedSequence anchor;
    TaggedSequence positive;
    TaggedSequence negative;
};

// Cross-entropy over the classifier's logits. Throws Error on empty input,
// a single class, or a label outside the head.
TrainingLog fit_classifier(SequenceClassifier& model, std::span<const LabeledSequence> examples,
                           const TrainingConfig& config);

// Binary cross-entropy; positives labelled 1, negatives 0.
TrainingLog fit_pairwise(PairScorer& model, std::span<const TaggedSequence> positives,
                         std::span<const TaggedSequence> negatives, const TrainingConfig& config);

// max(0, d(a,p) - d(a,n) + margin) with the anchor through the query tower and
// positive/negative through the entity tower.
TrainingLog fit_triplet(BiEncoder& model, std::span<const Triplet> triplets, const TrainingConfig& config);

double triplet_loss(const Vector& anchor, const Vector& positive, const Vector& negative, double margin);
double triplet_loss(const BiEncoder& model, const Triplet& triplet, double margin);

// Adds scale * d loss / d theta into every parameter's grad; returns the loss.
double accumulate_triplet_gradient(BiEncoder& model, const Triplet& triplet, double margin, double scale = 1.0);
double accumulate_classifier_gradient(SequenceClassifier& model, const LabeledSequence& example, double scale = 1.0);
double accumulate_pairwise_gradient(PairScorer& model, const TaggedSequence& fused, double target, double scale = 1.0);

}  // namespace tablelink
