// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <atomic>
#include <random>

#include <unistd.h>

namespace tablelink::fixture {

std::filesystem::path data_dir() { return TABLELINK_TEST_DATA_DIR; }

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tablelink-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

CellTypeScores SmokeCellTypes::scores(const CellContext& context) const {
    static const std::map<std::string, CellType> types = {{"SQuAD", CellType::dataset},
                                                           {"COCO", CellType::dataset},
                                                           {"MNLI (acc)", CellType::dataset_and_metric},
                                                           {"BERT [1]", CellType::method}};
    auto it = types.find(context.cell_content);
    const CellType t = it == types.end() ? CellType::other : it->second;
    CellTypeScores s{};
    s.fill(0.05);
    s[static_cast<std::size_t>(t)] = 0.8;
    return s;
}

double SmokeSources::probability(const CellContext& context, const ReferenceEntry& source) const {
    static const std::map<std::pair<std::string, int>, double> table = {
        {{"SQuAD", 2}, 0.9}, {{"MNLI (acc)", 3}, 0.8}, {{"BERT [1]", 1}, 0.95}};
    auto it = table.find({context.cell_content, source.index_in_reference_section});
    return it == table.end() ? 0.1 : it->second;
}

Vector SmokeDense::embed_cell(const CellContext& context) const {
    static const std::map<std::string, std::pair<double, double>> table = {
        {"SQuAD", {0.0, 0.9}}, {"COCO", {0.2, 0.0}}, {"MNLI (acc)", {0.9, 0.1}}};
    auto it = table.find(context.cell_content);
    const auto [x, y] = it == table.end() ? std::pair{0.5, 0.5} : it->second;
    return Vector{{x, y}};
}

Vector SmokeDense::embed_entity(const Entity& entity) const {
    static const std::map<std::string, std::pair<double, double>> table = {
        {"d-coco", {0.0, 0.0}}, {"d-mnli", {1.0, 0.0}}, {"d-squad", {0.0, 1.0}}};
    auto it = table.find(entity.id);
    const auto [x, y] = it == table.end() ? std::pair{5.0, 5.0} : it->second;
    return Vector{{x, y}};
}

double SmokeEntities::probability(const CellContext& context, const Entity& entity) const {
    static const std::map<std::pair<std::string, std::string>, double> table = {
        {{"SQuAD", "d-squad"}, 0.85}, {{"COCO", "d-coco"}, 0.3}, {{"MNLI (acc)", "d-mnli"}, 0.75}};
    auto it = table.find({context.cell_content, entity.id});
    return it == table.end() ? 0.1 : it->second;
}

double TableSources::probability(const CellContext& context, const ReferenceEntry& source) const {
    auto it = table_.find({context.cell_content, source.index_in_reference_section});
    return it == table_.end() ? fallback_ : it->second;
}

double TableEntities::probability(const CellContext&, const Entity& entity) const {
    auto it = table_.find(entity.id);
    return it == table_.end() ? 0.0 : it->second;
}

CellContext simple_context(std::string content, std::vector<std::string> sentences) {
    CellContext c;
    c.cell_content = std::move(content);
    c.context_sentences = std::move(sentences);
    return c;
}

ReferenceEntry make_reference(int index, std::string title, std::optional<std::string> kb_paper) {
    ReferenceEntry r;
    r.index_in_reference_section = index;
    r.title = std::move(title);
    r.matched_kb_paper_id = std::move(kb_paper);
    return r;
}

DocumentRecord make_document(std::string id, std::string topic, std::vector<ReferenceEntry> references) {
    DocumentRecord d;
    d.id = std::move(id);
    d.topic_fold = std::move(topic);
    d.title = "Document " + d.id;
    d.sentences = {"Placeholder sentence for " + d.id + "."};
    d.references = std::move(references);
    return d;
}

std::vector<CtcExample> toy_ctc_examples() {
    const std::vector<std::pair<CellType, std::vector<std::pair<std::string, std::string>>>> rows = {
        {CellType::other, {{"12.5", "Scores are averaged."}, {"Params", "Model sizes are listed."}, {"-", "Missing entries."}}},
        {CellType::dataset, {{"ImageNet", "We train on ImageNet."}, {"CIFAR-10", "Images from CIFAR-10."},
                             {"SQuAD", "Questions from SQuAD."}}},
        {CellType::method, {{"ResNet-50", "Our ResNet-50 backbone."}, {"BERT-large", "We fine-tune BERT-large."},
                            {"Transformer", "A Transformer baseline."}}},
        {CellType::metric, {{"Accuracy", "Top-1 accuracy is reported."}, {"BLEU", "BLEU on newstest."},
                            {"F1", "Token-level F1."}}},
        {CellType::dataset_and_metric, {{"SST-2 (acc)", "Accuracy on SST-2."}, {"CoNLL F1", "F1 on CoNLL."},
                                        {"WMT14 BLEU", "BLEU on WMT14."}}},
    };
    std::vector<CtcExample> out;
    int col = 0;
    for (const auto& [type, cells] : rows) {
        for (const auto& [text, sentence] : cells) {
            CtcExample e;
            e.cell = {"toy", "t", 0, col++};
            e.context = simple_context(text, {sentence, "The table compares systems."});
            e.label = type;
            out.push_back(std::move(e));
        }
    }
    return out;
}

ToyAsmTask toy_asm_task() {
    // Keyword per reference; cells mention exactly one keyword.
    const std::vector<std::string> keywords = {"Alpha", "Bravo", "Charlie", "Delta"};
    std::vector<DocumentRecord> docs;
    for (int d = 0; d < 2; ++d) {
        std::vector<ReferenceEntry> refs;
        for (int i = 0; i < 4; ++i) {
            const auto& kw = keywords[static_cast<std::size_t>((i + d) % 4)];
            refs.push_back(make_reference(i + 1, kw + " networks for structured prediction"));
        }
        auto doc = make_document("asm-" + std::to_string(d), "question_answering", refs);
        doc.title = "Echo models revisited";
        docs.push_back(std::move(doc));
    }
    ToyAsmTask task{Corpus(docs, {}), {}};
    const std::vector<std::string> suffixes = {"-base", "-large"};
    int col = 0;
    for (const auto& doc : task.corpus.documents()) {
        for (const auto& suffix : suffixes) {
            for (const auto& ref : doc.references) {
                const auto kw = ref.title.substr(0, ref.title.find(' '));
                if (suffix == "-large" && (kw == "Charlie" || kw == "Delta")) continue;
                AsmExample ex;
                ex.cell = {doc.id, "t", 0, col++};
                ex.context = simple_context(kw + suffix);
                ex.document_id = doc.id;
                ex.gold = {SourceCandidate::reference(ref.index_in_reference_section)};
                task.examples.push_back(std::move(ex));
            }
            AsmExample self;
            self.cell = {doc.id, "t", 0, col++};
            self.context = simple_context("Echo" + suffix);
            self.document_id = doc.id;
            self.gold = {SourceCandidate::self()};
            task.examples.push_back(std::move(self));
        }
    }
    return task;
}

KBStore toy_kb() {
    std::vector<Entity> e = {
        {"m-resnet", EntityKind::method, "ResNet", "Residual Network", "Deep residual learning."},
        {"m-bert", EntityKind::method, "BERT", "Bidirectional Encoder Representations", "Masked language model."},
        {"m-lstm", EntityKind::method, "LSTM", "Long Short-Term Memory", "Recurrent network."},
        {"m-gan", EntityKind::method, "GAN", "Generative Adversarial Network", "Adversarial generator."},
        {"m-yolo", EntityKind::method, "YOLO", "You Only Look Once", "Single-stage detector."},
        {"m-vit", EntityKind::method, "ViT", "Vision Transformer", "Patch-based transformer."},
        {"m-gcn", EntityKind::method, "GCN", "Graph Convolutional Network", "Spectral graph model."},
        {"m-unet", EntityKind::method, "U-Net", "U-Net", "Encoder-decoder segmentation network."},
        {"m-xgb", EntityKind::method, "XGBoost", "Extreme Gradient Boosting", "Boosted trees."},
        {"m-svm", EntityKind::method, "SVM", "Support Vector Machine", "Max-margin classifier."},
        {"d-imagenet", EntityKind::dataset, "ImageNet", "ImageNet", "Large image classification dataset."},
        {"d-coco", EntityKind::dataset, "COCO", "Common Objects in Context", "Detection dataset."},
        {"d-squad", EntityKind::dataset, "SQuAD", "Stanford Question Answering Dataset", "Reading comprehension."},
        {"d-mnli", EntityKind::dataset, "MNLI", "Multi-Genre NLI", "Entailment corpus."},
        {"d-cifar", EntityKind::dataset, "CIFAR-10", "CIFAR-10", "Tiny images in ten classes."},
        {"d-wmt", EntityKind::dataset, "WMT14", "WMT 2014 English-German", "Translation benchmark."},
        {"d-voc", EntityKind::dataset, "VOC", "PASCAL Visual Object Classes", "Detection benchmark."},
        {"d-kitti", EntityKind::dataset, "KITTI", "KITTI Vision Benchmark", "Driving scenes."},
        {"d-mnist", EntityKind::dataset, "MNIST", "MNIST", "Handwritten digits."},
        {"d-sst", EntityKind::dataset, "SST-2", "Stanford Sentiment Treebank", "Binary sentiment."},
    };
    return KBStore(std::move(e), {}, {});
}

std::vector<ElTrainingPair> toy_el_pairs(const KBStore& kb, std::size_t negatives) {
    const std::vector<std::pair<std::string, std::string>> cells = {
        {"ResNet-101", "m-resnet"}, {"BERT-base", "m-bert"},   {"LSTM (2 layers)", "m-lstm"},      {"YOLO v3", "m-yolo"},
        {"ViT-B/16", "m-vit"},      {"ImageNet-1k", "d-imagenet"}, {"COCO val", "d-coco"}, {"SQuAD v1.1", "d-squad"},
        {"MNLI-m", "d-mnli"},       {"WMT14 En-De", "d-wmt"},
    };
    std::vector<ElTrainingPair> out;
    int col = 0;
    for (const auto& [text, gold] : cells) {
        ElTrainingPair p;
        p.cell = {"toy-el", "t", 0, col++};
        p.context = simple_context(text);
        p.gold_id = gold;
        for (const auto* neg : mine_negatives(kb, text, kb.entity(gold).kind, gold, negatives)) {
            p.negative_ids.push_back(neg->id);
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace tablelink::fixture
