// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tablelink/cer.hpp"
#include "tablelink/corpus.hpp"
#include "tablelink/ctc.hpp"
#include "tablelink/ed.hpp"
#include "tablelink/kb_store.hpp"
#include "tablelink/source_matching.hpp"

namespace tablelink::fixture {

std::filesystem::path data_dir();

// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

// Lookup-table scorers keyed by cell content for the five-cell smoke corpus.
class SmokeCellTypes final : public CellTypeScorer {
public:
    CellTypeScores scores(const CellContext& context) const override;
};

class SmokeSources final : public SourceScorer {
public:
    double probability(const CellContext& context, const ReferenceEntry& source) const override;
};

class SmokeDense final : public DenseEmbedder {
public:
    Vector embed_cell(const CellContext& context) const override;
    Vector embed_entity(const Entity& entity) const override;
};

class SmokeEntities final : public EntityScorer {
public:
    double probability(const CellContext& context, const Entity& entity) const override;
};

// Fixed-logit scorer for classify tests.
class FixedCellTypes final : public CellTypeScorer {
public:
    explicit FixedCellTypes(CellTypeScores s) : s_(s) {}
    CellTypeScores scores(const CellContext&) const override { return s_; }

private:
    CellTypeScores s_;
};

// Probabilities by (cell content, reference index); 0 stands for SELF.
class TableSources final : public SourceScorer {
public:
    explicit TableSources(std::map<std::pair<std::string, int>, double> table, double fallback = 0.1)
        : table_(std::move(table)), fallback_(fallback) {}
    double probability(const CellContext& context, const ReferenceEntry& source) const override;

private:
    std::map<std::pair<std::string, int>, double> table_;
    double fallback_;
};

// Probabilities by entity id.
class TableEntities final : public EntityScorer {
public:
    explicit TableEntities(std::map<std::string, double> table) : table_(std::move(table)) {}
    double probability(const CellContext&, const Entity& entity) const override;

private:
    std::map<std::string, double> table_;
};

CellContext simple_context(std::string content, std::vector<std::string> sentences = {});

DocumentRecord make_document(std::string id, std::string topic, std::vector<ReferenceEntry> references);
ReferenceEntry make_reference(int index, std::string title, std::optional<std::string> kb_paper = std::nullopt);

// Separable five-class cell typing task, three cells per class.
std::vector<CtcExample> toy_ctc_examples();

// Documents with lettered references; each cell names its source's keyword.
struct ToyAsmTask {
    Corpus corpus;
    std::vector<AsmExample> examples;
};
ToyAsmTask toy_asm_task();

// Twenty entities and ten inKB cells whose text overlaps the gold entity.
KBStore toy_kb();
std::vector<ElTrainingPair> toy_el_pairs(const KBStore& kb, std::size_t negatives);

}  // namespace tablelink::fixture
