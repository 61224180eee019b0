// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/context.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <regex>

#include "tablelink/errors.hpp"
#include "tablelink/text.hpp"

namespace tablelink {

std::string_view to_string(SegmentTag tag) noexcept {
    switch (tag) {
        case SegmentTag::cell: return "CELL";
        case SegmentTag::sentence: return "SENTENCE";
        case SegmentTag::row: return "ROW";
        case SegmentTag::col: return "COL";
        case SegmentTag::meta: return "META";
        case SegmentTag::paper: return "PAPER";
        case SegmentTag::entity: return "ENTITY";
    }
    return "CELL";
}

std::string_view to_string(Region region) noexcept {
    switch (region) {
        case Region::top_left: return "top-left";
        case Region::top_right: return "top-right";
        case Region::bottom_left: return "bottom-left";
        case Region::bottom_right: return "bottom-right";
    }
    return "top-left";
}

void TaggedSequence::validate() const {
    if (tokens.size() != segment_tags.size()) throw Error("tagged sequence: token/tag length mismatch");
    const bool anchored = std::any_of(segment_tags.begin(), segment_tags.end(), [](SegmentTag t) {
        return t == SegmentTag::cell || t == SegmentTag::paper || t == SegmentTag::entity;
    });
    if (!anchored) throw Error("tagged sequence: no CELL, PAPER or ENTITY token");
}

std::vector<std::string> bm25_sentences(std::string_view query, const DocumentRecord& document, std::size_t n,
                                        Bm25Params params) {
    if (n == 0) return {};
    const Bm25Collection collection(document.sentences, params);
    std::vector<std::string> out;
    for (const auto& hit : collection.search(query)) {
        out.push_back(document.sentences[hit.doc]);
        if (out.size() == n) break;
    }
    return out;
}

bool is_numeric_cell(std::string_view text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    constexpr std::string_view kPlusMinus = "\xC2\xB1";
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text.substr(i, kPlusMinus.size()) == kPlusMinus) {
            i += kPlusMinus.size() - 1;
            continue;
        }
        if (text[i] == '%' || text[i] == ',') continue;
        cleaned.push_back(text[i]);
    }
    std::string_view body = trim(cleaned);
    if (!body.empty() && body.front() == '+') body.remove_prefix(1);
    if (body.empty() || std::none_of(body.begin(), body.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return false;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    return ec == std::errc{} && ptr == body.data() + body.size() && std::isfinite(value);
}

std::optional<GridPosition> first_numeric_cell(const TableRecord& table) {
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) {
            if (is_numeric_cell(table.at(r, c))) return GridPosition{static_cast<int>(r), static_cast<int>(c)};
        }
    }
    return std::nullopt;
}

Region compute_region(const TableRecord& table, int row, int col) {
    double anchor_row = 0.0;
    double anchor_col = 0.0;
    if (auto anchor = first_numeric_cell(table)) {
        anchor_row = anchor->row;
        anchor_col = anchor->col;
    } else {
        anchor_row = (static_cast<double>(table.rows()) - 1.0) / 2.0;
        anchor_col = (static_cast<double>(table.cols()) - 1.0) / 2.0;
    }
    const bool top = row < anchor_row;
    const bool left = col < anchor_col;
    if (top) return left ? Region::top_left : Region::top_right;
    return left ? Region::bottom_left : Region::bottom_right;
}

bool detect_reference(std::string_view cell_text) {
    static const std::regex bracketed(R"(\[\s*\d+(?:\s*(?:,|;|-|–)\s*\d+)*\s*\])");
    static const std::regex name_year_inside(R"(\(\s*[A-Z][^()]*?(?:19|20)\d{2}[a-z]?\s*\))");
    static const std::regex name_then_year(R"([A-Z][A-Za-z'\-]+(?:\s+et\s+al\.?)?\s*\(\s*(?:19|20)\d{2}[a-z]?\s*\))");
    const std::string text(cell_text);
    return std::regex_search(text, bracketed) || std::regex_search(text, name_year_inside) ||
           std::regex_search(text, name_then_year);
}

std::string join_line(const std::vector<std::string>& cells) {
    std::vector<std::string> pieces;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) pieces.emplace_back(kSepToken);
        if (auto t = trim(cells[i]); !t.empty()) pieces.emplace_back(t);
    }
    return join(pieces, " ");
}

CellContext build_cell_context(const DocumentRecord& document, const TableRecord& table, int row, int col,
                               std::size_t n_sentences) {
    if (row < 0 || col < 0 || static_cast<std::size_t>(row) >= table.rows() ||
        static_cast<std::size_t>(col) >= table.cols()) {
        throw Error("cell (" + std::to_string(row) + "," + std::to_string(col) + ") outside table " + table.id);
    }
    CellContext ctx;
    ctx.cell_content = table.at(row, col);
    ctx.region = compute_region(table, row, col);
    ctx.context_sentences = bm25_sentences(ctx.cell_content, document, n_sentences);
    ctx.row_context = join_line(table.grid[row]);
    std::vector<std::string> column;
    for (const auto& r : table.grid) column.push_back(r[col]);
    ctx.col_context = join_line(column);
    ctx.position = {row, col};
    ctx.reverse_position = {static_cast<int>(table.rows()) - 1 - row, static_cast<int>(table.cols()) - 1 - col};
    ctx.has_reference = detect_reference(ctx.cell_content);
    return ctx;
}

CellContext build_cell_context(const TableCellRecord& cell, const DocumentRecord& document, std::size_t n_sentences) {
    const auto* table = document.find_table(cell.table_id);
    if (!table) throw NotFoundError("table " + cell.table_id + " not in document " + document.id);
    return build_cell_context(document, *table, cell.row, cell.col, n_sentences);
}

std::string meta_string(const CellContext& context) {
    return "region=" + std::string(to_string(context.region)) + " pos=" + std::to_string(context.position.row) + "," +
           std::to_string(context.position.col) + " rpos=" + std::to_string(context.reverse_position.row) + "," +
           std::to_string(context.reverse_position.col) + " ref=" + (context.has_reference ? "1" : "0");
}

// ---------------------------------------------------------------------------
// Span sequences

void SpanSequence::add(SegmentTag tag, std::string_view lead, std::vector<std::string> tokens,
                       int truncation_priority) {
    spans_.push_back({tag, std::string(lead), std::move(tokens), truncation_priority});
}

std::size_t SpanSequence::size() const noexcept {
    std::size_t n = 0;
    for (const auto& s : spans_) n += s.tokens.size() + (s.lead.empty() ? 0 : 1);
    return n;
}

std::size_t SpanSequence::min_size() const noexcept {
    std::size_t n = 0;
    for (const auto& s : spans_) {
        if (s.truncation_priority == 0) n += s.tokens.size() + (s.lead.empty() ? 0 : 1);
    }
    return n;
}

TaggedSequence SpanSequence::render(std::size_t max_len) const {
    std::vector<std::size_t> keep(spans_.size());
    std::vector<bool> dropped(spans_.size(), false);
    for (std::size_t i = 0; i < spans_.size(); ++i) keep[i] = spans_[i].tokens.size();

    std::size_t total = size();
    if (total > max_len) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < spans_.size(); ++i) {
            if (spans_[i].truncation_priority > 0) order.push_back(i);
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return spans_[a].truncation_priority > spans_[b].truncation_priority;
        });
        for (std::size_t i : order) {
            if (total <= max_len) break;
            const std::size_t excess = total - max_len;
            const auto& s = spans_[i];
            if (excess >= s.tokens.size()) {
                total -= s.tokens.size() + (s.lead.empty() ? 0 : 1);
                keep[i] = 0;
                dropped[i] = true;
            } else {
                keep[i] = s.tokens.size() - excess;
                total -= excess;
            }
        }
    }

    TaggedSequence seq;
    seq.tokens.reserve(total);
    seq.segment_tags.reserve(total);
    for (std::size_t i = 0; i < spans_.size(); ++i) {
        if (dropped[i]) continue;
        const auto& s = spans_[i];
        if (!s.lead.empty()) seq.push(s.lead, s.tag);
        for (std::size_t t = 0; t < keep[i]; ++t) seq.push(s.tokens[t], s.tag);
    }
    return seq;
}

SpanSequence cell_spans(const CellContext& context) {
    SpanSequence s;
    s.add(SegmentTag::cell, kClsToken, word_tokens(context.cell_content), 0);
    s.add(SegmentTag::meta, kSepToken, split_whitespace(meta_string(context)), 0);
    s.add(SegmentTag::row, kSepToken, word_tokens(context.row_context), 2);
    s.add(SegmentTag::col, kSepToken, word_tokens(context.col_context), 3);
    for (std::size_t i = 0; i < context.context_sentences.size(); ++i) {
        s.add(SegmentTag::sentence, kSepToken, word_tokens(context.context_sentences[i]), 100 + static_cast<int>(i));
    }
    return s;
}

SpanSequence paper_spans(const ReferenceEntry& paper) {
    SpanSequence s;
    s.add(SegmentTag::paper, kClsToken, {std::to_string(paper.index_in_reference_section)}, 0);
    s.add(SegmentTag::paper, kSepToken, word_tokens(paper.first_author_last_name), 0);
    s.add(SegmentTag::paper, kSepToken, paper.year ? std::vector<std::string>{std::to_string(*paper.year)}
                                                   : std::vector<std::string>{},
          0);
    s.add(SegmentTag::paper, kSepToken, word_tokens(paper.title), 1);
    s.add(SegmentTag::paper, kSepToken, word_tokens(paper.abstract), 2);
    return s;
}

SpanSequence entity_spans(const Entity& entity) {
    SpanSequence s;
    s.add(SegmentTag::entity, kClsToken, word_tokens(entity.abbreviation), 0);
    s.add(SegmentTag::entity, kSepToken, word_tokens(entity.full_name), 0);
    s.add(SegmentTag::entity, kSepToken, word_tokens(entity.description), 1);
    return s;
}

TaggedSequence serialize_cell(const CellContext& context, std::size_t max_len) {
    return cell_spans(context).render(max_len);
}

TaggedSequence serialize_paper(const ReferenceEntry& paper, std::size_t max_len) {
    return paper_spans(paper).render(max_len);
}

TaggedSequence serialize_entity(const Entity& entity, std::size_t max_len) {
    return entity_spans(entity).render(max_len);
}

TaggedSequence fuse_pair(const SpanSequence& first, const SpanSequence& second, std::size_t max_len) {
    std::size_t budget_first = first.size();
    std::size_t budget_second = second.size();
    if (budget_first + budget_second > max_len) {
        const std::size_t half = max_len / 2;
        if (first.size() <= half) {
            budget_second = max_len - first.size();
        } else if (second.size() <= max_len - half) {
            budget_first = max_len - second.size();
        } else {
            budget_first = half;
            budget_second = max_len - half;
        }
    }
    TaggedSequence out = first.render(budget_first);
    TaggedSequence tail = second.render(budget_second);
    for (std::size_t i = 0; i < tail.size(); ++i) {
        out.push(i == 0 ? std::string(kPairToken) : std::move(tail.tokens[i]), tail.segment_tags[i]);
    }
    return out;
}

}  // namespace tablelink
