// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tablelink/bm25.hpp"
#include "tablelink/corpus.hpp"
#include "tablelink/kb_store.hpp"

namespace tablelink {

enum class SegmentTag : std::uint8_t { cell, sentence, row, col, meta, paper, entity };

inline constexpr std::size_t kNumSegmentTags = 7;
inline constexpr std::array<SegmentTag, kNumSegmentTags> kSegmentTags = {
    SegmentTag::cell, SegmentTag::sentence, SegmentTag::row,   SegmentTag::col,
    SegmentTag::meta, SegmentTag::paper,    SegmentTag::entity};

std::string_view to_string(SegmentTag tag) noexcept;

// Reserved tokens. Byte-exact so independent implementations serialize alike.
inline constexpr std::string_view kSepToken = "⟨SEP⟩";
inline constexpr std::string_view kClsToken = "⟨CLS⟩";
inline constexpr std::string_view kPairToken = "⟨PAIR⟩";

inline constexpr std::size_t kMaxSequenceLength = 512;
inline constexpr std::size_t kDefaultContextSentences = 5;

enum class Region { top_left, top_right, bottom_left, bottom_right };

std::string_view to_string(Region region) noexcept;

struct GridPosition {
    int row = 0;
    int col = 0;

    bool operator==(const GridPosition&) const = default;
};

struct CellContext {
    std::string cell_content;
    Region region = Region::top_left;
    std::vector<std::string> context_sentences;  // best first
    std::string row_context;
    std::string col_context;
    GridPosition position;          // from the top-left corner
    GridPosition reverse_position;  // from the bottom-right corner
    bool has_reference = false;

    bool operator==(const CellContext&) const = default;
};

struct TaggedSequence {
    std::vector<std::string> tokens;
    std::vector<SegmentTag> segment_tags;  // parallel to tokens

    std::size_t size() const noexcept { return tokens.size(); }
    void push(std::string token, SegmentTag tag) {
        tokens.push_back(std::move(token));
        segment_tags.push_back(tag);
    }
    // Throws Error when lengths differ or no CELL/PAPER/ENTITY token exists.
    void validate() const;

    bool operator==(const TaggedSequence&) const = default;
};

// Top-n document sentences for the query by BM25 over the document's own
// sentences; zero-score sentences are never returned.
std::vector<std::string> bm25_sentences(std::string_view query, const DocumentRecord& document, std::size_t n,
                                        Bm25Params params = {});

// Numeric after stripping '%', '±' and ',' and surrounding whitespace.
bool is_numeric_cell(std::string_view text);

// First numeric cell in row-major order.
std::optional<GridPosition> first_numeric_cell(const TableRecord& table);

// Quadrant relative to the first numeric cell, or to the grid center when the
// table has no numeric cell. Rows strictly above the anchor are "top", columns
// strictly left of it are "left".
Region compute_region(const TableRecord& table, int row, int col);

// Inline citation: bracketed integers ("[33]", "[3, 4]") or a name-year
// parenthetical ("(Roller et al., 2021)", "Roller et al. (2021)").
bool detect_reference(std::string_view cell_text);

// Cells of one row or column joined by the separator token; empty cells
// contribute only their separator.
std::string join_line(const std::vector<std::string>& cells);

CellContext build_cell_context(const DocumentRecord& document, const TableRecord& table, int row, int col,
                               std::size_t n_sentences = kDefaultContextSentences);
CellContext build_cell_context(const TableCellRecord& cell, const DocumentRecord& document,
                               std::size_t n_sentences = kDefaultContextSentences);

// "region=<v> pos=<r>,<c> rpos=<r>,<c> ref=<0|1>"
std::string meta_string(const CellContext& context);

// Ordered spans prior to truncation. Spans with truncation priority 0 are
// never cut; otherwise the highest priority span loses tail tokens first.
class SpanSequence {
public:
    struct Span {
        SegmentTag tag;
        std::string lead;  // reserved token opening the span
        std::vector<std::string> tokens;
        int truncation_priority = 0;
    };

    void add(SegmentTag tag, std::string_view lead, std::vector<std::string> tokens, int truncation_priority);

    std::size_t size() const noexcept;
    // Length after removing every truncatable span.
    std::size_t min_size() const noexcept;
    const std::vector<Span>& spans() const noexcept { return spans_; }

    TaggedSequence render(std::size_t max_len = kMaxSequenceLength) const;

private:
    std::vector<Span> spans_;
};

// Cell: content, META, ROW, COL, then sentences best first. Sentences are cut
// lowest-ranked first, then COL, then ROW; content and META are never cut.
SpanSequence cell_spans(const CellContext& context);
// Paper: index, first author, year, title, abstract (abstract cut first, then title).
SpanSequence paper_spans(const ReferenceEntry& paper);
// Entity: abbreviation, full name, description (description cut first).
SpanSequence entity_spans(const Entity& entity);

TaggedSequence serialize_cell(const CellContext& context, std::size_t max_len = kMaxSequenceLength);
TaggedSequence serialize_paper(const ReferenceEntry& paper, std::size_t max_len = kMaxSequenceLength);
TaggedSequence serialize_entity(const Entity& entity, std::size_t max_len = kMaxSequenceLength);

// Concatenates both sides with the second side's leading token replaced by
// ⟨PAIR⟩; each side keeps its own tags. When the pair is too long, the longer
// side is truncated first (each keeps at least half of max_len if it needs it).
TaggedSequence fuse_pair(const SpanSequence& first, const SpanSequence& second,
                         std::size_t max_len = kMaxSequenceLength);

}  // namespace tablelink
