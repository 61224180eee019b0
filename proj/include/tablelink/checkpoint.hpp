// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>

#include "tablelink/encoder.hpp"
#include "tablelink/training.hpp"

namespace tablelink {

inline constexpr std::string_view kCheckpointBlob = "model.bin";
inline constexpr std::string_view kCheckpointManifest = "manifest.txt";

// Sidecar manifest: plain "key=value" lines.
struct ModelManifest {
    std::string model_type;  // classifier | pair | biencoder
    BackendSpec backend;
    std::size_t max_length = kMaxSequenceLength;
    std::size_t num_classes = 0;
    std::uint64_t seed = 0;
    TrainingConfig training;
    std::map<std::string, std::string> extra;

    std::string to_text() const;
    static ModelManifest parse(const std::string& text);
};

std::string segment_tag_vocabulary();

void write_parameters(std::ostream& out, std::span<Parameter* const> params);
// Shapes must match the receiving parameters exactly.
void read_parameters(std::istream& in, std::span<Parameter* const> params);

void save_classifier(const std::filesystem::path& dir, SequenceClassifier& model, const ModelManifest& manifest);
void save_pair_scorer(const std::filesystem::path& dir, PairScorer& model, const ModelManifest& manifest);
void save_bi_encoder(const std::filesystem::path& dir, BiEncoder& model, const ModelManifest& manifest);

// Throw MissingArtifactError if the directory lacks blob or manifest.
SequenceClassifier load_classifier(const std::filesystem::path& dir, ModelManifest* manifest = nullptr);
PairScorer load_pair_scorer(const std::filesystem::path& dir, ModelManifest* manifest = nullptr);
BiEncoder load_bi_encoder(const std::filesystem::path& dir, ModelManifest* manifest = nullptr);

}  // namespace tablelink
