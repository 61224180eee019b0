// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "tablelink/errors.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/text.hpp"

namespace tablelink {

namespace {

constexpr char kMagic[8] = {'T', 'L', 'N', 'K', 'P', 'R', 'M', '1'};

std::string get(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("checkpoint manifest: missing key '" + key + "'");
    return it->second;
}

void require_files(const std::filesystem::path& dir) {
    for (auto name : {kCheckpointBlob, kCheckpointManifest}) {
        if (!std::filesystem::exists(dir / name)) throw MissingArtifactError((dir / name).string());
    }
}

ModelManifest read_manifest(const std::filesystem::path& dir, std::string_view expected_type) {
    auto m = ModelManifest::parse(read_text_file(dir / kCheckpointManifest));
    if (m.model_type != expected_type) {
        throw ParseError((dir / kCheckpointManifest).string() + ": expected model type " + std::string(expected_type) +
                         ", found " + m.model_type);
    }
    return m;
}

void save(const std::filesystem::path& dir, std::span<Parameter* const> params, const ModelManifest& manifest) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / kCheckpointBlob, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / kCheckpointBlob).string());
    write_parameters(out, params);
    out.close();
    write_text_file(dir / kCheckpointManifest, manifest.to_text());
}

void load(const std::filesystem::path& dir, std::span<Parameter* const> params) {
    std::ifstream in(dir / kCheckpointBlob, std::ios::binary);
    if (!in) throw MissingArtifactError((dir / kCheckpointBlob).string());
    read_parameters(in, params);
}

EncoderModel make_encoder(const ModelManifest& m, std::uint64_t seed) {
    return EncoderModel(make_backend(m.backend, seed), seed, m.max_length);
}

}  // namespace

std::string segment_tag_vocabulary() {
    std::vector<std::string> names;
    for (auto t : kSegmentTags) names.emplace_back(to_string(t));
    return join(names, ",");
}

std::string ModelManifest::to_text() const {
    std::ostringstream out;
    out << "model=" << model_type << "\n"
        << "backend=" << backend.name << "\n"
        << "embedding_dim=" << backend.embedding_dim << "\n"
        << "hidden_dim=" << backend.hidden_dim << "\n"
        << "max_length=" << max_length << "\n"
        << "num_classes=" << num_classes << "\n"
        << "tags=" << segment_tag_vocabulary() << "\n"
        << "seed=" << seed << "\n";
    std::istringstream cfg(training.to_string());
    std::string line;
    while (std::getline(cfg, line)) out << "config." << line << "\n";
    for (const auto& [k, v] : extra) out << "extra." << k << "=" << v << "\n";
    return out.str();
}

ModelManifest ModelManifest::parse(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("checkpoint manifest: malformed line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    ModelManifest m;
    try {
        m.model_type = get(kv, "model");
        m.backend.name = get(kv, "backend");
        m.backend.embedding_dim = std::stoul(get(kv, "embedding_dim"));
        m.backend.hidden_dim = std::stoul(get(kv, "hidden_dim"));
        m.max_length = std::stoul(get(kv, "max_length"));
        m.num_classes = std::stoul(get(kv, "num_classes"));
        m.seed = std::stoull(get(kv, "seed"));
        if (get(kv, "tags") != segment_tag_vocabulary()) {
            throw ParseError("checkpoint manifest: segment tag vocabulary differs from this build");
        }
        m.training.epochs = std::stoi(get(kv, "config.epochs"));
        m.training.batch_size = std::stoi(get(kv, "config.batch_size"));
        m.training.learning_rate = std::stod(get(kv, "config.learning_rate"));
        m.training.warmup_fraction = std::stod(get(kv, "config.warmup_fraction"));
        m.training.triplet_margin = std::stod(get(kv, "config.triplet_margin"));
        m.training.negatives_per_positive = std::stoi(get(kv, "config.negatives_per_positive"));
        m.training.weight_decay = std::stod(get(kv, "config.weight_decay"));
        m.training.seed = std::stoull(get(kv, "config.seed"));
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("checkpoint manifest: bad number: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw ParseError(std::string("checkpoint manifest: number out of range: ") + e.what());
    }
    for (const auto& [k, v] : kv) {
        if (k.rfind("extra.", 0) == 0) m.extra[k.substr(6)] = v;
    }
    return m;
}

void write_parameters(std::ostream& out, std::span<Parameter* const> params) {
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t count = params.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto* p : params) {
        const std::uint64_t rows = static_cast<std::uint64_t>(p->value.rows());
        const std::uint64_t cols = static_cast<std::uint64_t>(p->value.cols());
        out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
        out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
        out.write(reinterpret_cast<const char*>(p->value.data()),
                  static_cast<std::streamsize>(sizeof(double) * rows * cols));
    }
    if (!out) throw Error("failed writing parameters");
}

void read_parameters(std::istream& in, std::span<Parameter* const> params) {
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
        throw ParseError("checkpoint blob: bad header");
    }
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in || count != params.size()) throw ParseError("checkpoint blob: parameter count mismatch");
    for (auto* p : params) {
        std::uint64_t rows = 0, cols = 0;
        in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
        in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
        if (!in || rows != static_cast<std::uint64_t>(p->value.rows()) ||
            cols != static_cast<std::uint64_t>(p->value.cols())) {
            throw ParseError("checkpoint blob: shape mismatch for " + p->name);
        }
        in.read(reinterpret_cast<char*>(p->value.data()), static_cast<std::streamsize>(sizeof(double) * rows * cols));
        if (!in) throw ParseError("checkpoint blob: truncated");
        p->zero_grad();
        p->first_moment.setZero();
        p->second_moment.setZero();
    }
}

void save_classifier(const std::filesystem::path& dir, SequenceClassifier& model, const ModelManifest& manifest) {
    auto m = manifest;
    m.model_type = "classifier";
    m.num_classes = model.num_classes();
    save(dir, model.parameters(), m);
}

void save_pair_scorer(const std::filesystem::path& dir, PairScorer& model, const ModelManifest& manifest) {
    auto m = manifest;
    m.model_type = "pair";
    save(dir, model.parameters(), m);
}

void save_bi_encoder(const std::filesystem::path& dir, BiEncoder& model, const ModelManifest& manifest) {
    auto m = manifest;
    m.model_type = "biencoder";
    save(dir, model.parameters(), m);
}

SequenceClassifier load_classifier(const std::filesystem::path& dir, ModelManifest* manifest) {
    require_files(dir);
    const auto m = read_manifest(dir, "classifier");
    SequenceClassifier model(make_encoder(m, m.seed), m.num_classes, m.seed);
    load(dir, model.parameters());
    if (manifest) *manifest = m;
    return model;
}

PairScorer load_pair_scorer(const std::filesystem::path& dir, ModelManifest* manifest) {
    require_files(dir);
    const auto m = read_manifest(dir, "pair");
    PairScorer model(make_encoder(m, m.seed), m.seed);
    load(dir, model.parameters());
    if (manifest) *manifest = m;
    return model;
}

BiEncoder load_bi_encoder(const std::filesystem::path& dir, ModelManifest* manifest) {
    require_files(dir);
    const auto m = read_manifest(dir, "biencoder");
    BiEncoder model(make_encoder(m, m.seed), make_encoder(m, m.seed + 1));
    load(dir, model.parameters());
    if (manifest) *manifest = m;
    return model;
}

}  // namespace tablelink
