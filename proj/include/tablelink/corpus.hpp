// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tablelink/kb_store.hpp"

namespace tablelink {

enum class CellType { other = 0, dataset = 1, method = 2, metric = 3, dataset_and_metric = 4 };

inline constexpr std::size_t kNumCellTypes = 5;
// Also the tie-break order for argmax.
inline constexpr std::array<CellType, kNumCellTypes> kCellTypes = {
    CellType::other, CellType::dataset, CellType::method, CellType::metric, CellType::dataset_and_metric};

std::string_view to_string(CellType type) noexcept;
std::optional<CellType> parse_cell_type(std::string_view text) noexcept;

// Only these types are passed on to entity linking; metric-only cells are not linked.
bool is_linkable(CellType type) noexcept;
// dataset_and_metric retrieves datasets; non-linkable types map to nullopt.
std::optional<EntityKind> entity_kind_for(CellType type) noexcept;

inline constexpr std::string_view kOutKB = "OUTKB";

enum class SourceKind { self, reference };

struct SourceCandidate {
    SourceKind kind = SourceKind::self;
    int reference_index = 0;  // meaningful for reference only

    static SourceCandidate self() { return {SourceKind::self, 0}; }
    static SourceCandidate reference(int index) { return {SourceKind::reference, index}; }

    // SELF sorts first, then ascending reference index.
    auto operator<=>(const SourceCandidate&) const = default;
};

struct ReferenceEntry {
    int index_in_reference_section = 1;
    std::string first_author_last_name;
    std::optional<int> year;
    std::string title;
    std::string abstract;
    std::optional<std::string> matched_kb_paper_id;

    bool operator==(const ReferenceEntry&) const = default;
};

struct TableRecord {
    std::string id;
    std::vector<std::vector<std::string>> grid;  // row-major
    std::string caption;

    std::size_t rows() const noexcept { return grid.size(); }
    std::size_t cols() const noexcept { return grid.empty() ? 0 : grid.front().size(); }
    const std::string& at(std::size_t row, std::size_t col) const { return grid.at(row).at(col); }

    bool operator==(const TableRecord&) const = default;
};

struct DocumentRecord {
    std::string id;
    std::string topic_fold;
    std::string title;
    std::string abstract;
    std::optional<std::string> kb_paper_id;
    std::vector<std::string> sentences;
    std::vector<ReferenceEntry> references;
    std::vector<TableRecord> tables;

    const TableRecord* find_table(std::string_view table_id) const;
    const ReferenceEntry* find_reference(int index) const;

    bool operator==(const DocumentRecord&) const = default;
};

struct CellKey {
    std::string document_id;
    std::string table_id;
    int row = 0;
    int col = 0;

    auto operator<=>(const CellKey&) const = default;
};

std::string to_string(const CellKey& key);

struct TableCellRecord {
    std::string document_id;
    std::string table_id;
    int row = 0;
    int col = 0;
    std::string raw_text;
    std::optional<CellType> gold_cell_type;
    std::optional<std::set<SourceCandidate>> gold_attributed_sources;
    std::optional<std::string> gold_link;  // entity id or kOutKB

    CellKey key() const { return {document_id, table_id, row, col}; }
    bool gold_is_outkb() const { return gold_link && *gold_link == kOutKB; }
    bool gold_is_inkb() const { return gold_link && *gold_link != kOutKB; }

    bool operator==(const TableCellRecord&) const = default;
};

// Gold EL label of one cell: entity id or kOutKB.
struct GoldLink {
    CellKey cell;
    std::string link;

    bool is_outkb() const { return link == kOutKB; }
    bool operator==(const GoldLink&) const = default;
};

// Cells carrying a gold link, in input order.
std::vector<GoldLink> gold_links(const std::vector<const TableCellRecord*>& cells);

std::vector<std::string> default_topics();

struct FoldConfig {
    std::string validation_topic = "image_classification";
    std::vector<std::string> topics = default_topics();
};

// Plain "key = value" file; recognised keys: validation_topic, topics
// (comma-separated). '#' starts a comment.
FoldConfig load_fold_config(const std::filesystem::path& path);

struct FoldSplit {
    std::string validation_topic;
    std::string test_topic;
    std::vector<std::string> train_topics;

    bool operator==(const FoldSplit&) const = default;
};

// Immutable after load; safe for concurrent readers.
class Corpus {
public:
    Corpus() = default;
    // Checks referential integrity; throws ParseError naming document and field.
    Corpus(std::vector<DocumentRecord> documents, std::vector<TableCellRecord> cells, const FoldConfig& folds = {});

    const std::vector<DocumentRecord>& documents() const noexcept { return documents_; }
    const std::vector<TableCellRecord>& cells() const noexcept { return cells_; }

    const DocumentRecord& document(std::string_view id) const;
    const TableRecord& table(std::string_view document_id, std::string_view table_id) const;
    const TableCellRecord* find_cell(const CellKey& key) const;

    std::vector<const TableCellRecord*> cells_in_topics(const std::vector<std::string>& topics) const;

    // Topics present among documents, in fold-vocabulary order.
    std::vector<std::string> topics_present() const;

    std::size_t num_ctc_cells() const;
    std::size_t num_asm_cells() const;
    std::size_t num_el_cells() const;

    bool operator==(const Corpus& other) const {
        return documents_ == other.documents_ && cells_ == other.cells_;
    }

private:
    std::vector<DocumentRecord> documents_;
    std::vector<TableCellRecord> cells_;
    std::vector<std::string> topic_order_;
    std::map<std::string, std::size_t, std::less<>> doc_pos_;
    std::map<CellKey, std::size_t> cell_pos_;
};

inline constexpr std::string_view kDocumentsFile = "documents.jsonl";
inline constexpr std::string_view kTablesFile = "tables.jsonl";
inline constexpr std::string_view kCellsFile = "cells.jsonl";

// Reads documents.jsonl, tables.jsonl, cells.jsonl. Table captions missing
// from a document's sentence list are appended to it so they take part in
// context-sentence retrieval.
Corpus load_corpus(const std::filesystem::path& dir, const FoldConfig& folds = {});
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

struct ClassShare {
    std::string label;
    std::size_t count = 0;
    double fraction = 0.0;
    double expected = 0.0;
};

struct TopicCounts {
    std::string topic;
    std::size_t documents = 0;
    std::size_t tables = 0;
    std::size_t ctc_cells = 0;
    std::size_t asm_cells = 0;
    std::size_t el_cells = 0;
};

struct ValidationReport {
    std::size_t ctc_cells = 0;
    std::size_t asm_cells = 0;
    std::size_t el_cells = 0;
    std::vector<ClassShare> cell_types;       // in kCellTypes order
    std::vector<ClassShare> attribution;      // missing, self, reference
    std::size_t outkb_cells = 0;
    double outkb_fraction = 0.0;
    std::vector<TopicCounts> per_topic;
    std::vector<std::string> warnings;

    std::string to_text() const;
};

// Reference distribution of the released annotations; shares deviating by
// more than this many fraction points produce a warning.
inline constexpr double kDistributionTolerance = 0.02;

ValidationReport validate_corpus(const Corpus& corpus);

// One split per non-validation topic present in the corpus. Throws ConfigError
// with fewer than 3 topics or when the validation topic is absent.
std::vector<FoldSplit> make_folds(const Corpus& corpus, const FoldConfig& config = {});

}  // namespace tablelink
