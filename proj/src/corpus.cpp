// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "tablelink/errors.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/text.hpp"

namespace tablelink {

std::string_view to_string(CellType type) noexcept {
    switch (type) {
        case CellType::other: return "other";
        case CellType::dataset: return "dataset";
        case CellType::method: return "method";
        case CellType::metric: return "metric";
        case CellType::dataset_and_metric: return "dataset_and_metric";
    }
    return "other";
}

std::optional<CellType> parse_cell_type(std::string_view text) noexcept {
    for (auto t : kCellTypes) {
        if (text == to_string(t)) return t;
    }
    if (text == "dataset&metric") return CellType::dataset_and_metric;
    return std::nullopt;
}

bool is_linkable(CellType type) noexcept {
    return type == CellType::dataset || type == CellType::method || type == CellType::dataset_and_metric;
}

std::optional<EntityKind> entity_kind_for(CellType type) noexcept {
    switch (type) {
        case CellType::method: return EntityKind::method;
        case CellType::dataset:
        case CellType::dataset_and_metric: return EntityKind::dataset;
        default: return std::nullopt;
    }
}

std::string to_string(const CellKey& key) {
    return key.document_id + "/" + key.table_id + "[" + std::to_string(key.row) + "," + std::to_string(key.col) + "]";
}

const TableRecord* DocumentRecord::find_table(std::string_view table_id) const {
    for (const auto& t : tables) {
        if (t.id == table_id) return &t;
    }
    return nullptr;
}

const ReferenceEntry* DocumentRecord::find_reference(int index) const {
    for (const auto& r : references) {
        if (r.index_in_reference_section == index) return &r;
    }
    return nullptr;
}

std::vector<GoldLink> gold_links(const std::vector<const TableCellRecord*>& cells) {
    std::vector<GoldLink> out;
    for (const auto* c : cells) {
        if (c->gold_link) out.push_back({c->key(), *c->gold_link});
    }
    return out;
}

std::vector<std::string> default_topics() {
    return {"question_answering",  "object_detection",     "image_classification",       "speech_recognition",
            "image_generation",    "machine_translation",  "text_classification",        "natural_language_inference",
            "pose_estimation",     "semantic_segmentation", "misc"};
}

FoldConfig load_fold_config(const std::filesystem::path& path) {
    FoldConfig config;
    std::istringstream in(read_text_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        if (key == "validation_topic") {
            config.validation_topic = value;
        } else if (key == "topics") {
            config.topics.clear();
            std::string item;
            std::istringstream list(value);
            while (std::getline(list, item, ',')) {
                if (auto t = trim(item); !t.empty()) config.topics.emplace_back(t);
            }
        } else {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (config.validation_topic.empty()) throw ConfigError(path.string() + ": validation_topic is empty");
    return config;
}

namespace {

[[noreturn]] void schema_error(std::string_view doc, std::string_view field, std::string_view what) {
    throw ParseError("document " + std::string(doc) + ": field '" + std::string(field) + "': " + std::string(what));
}

}  // namespace

Corpus::Corpus(std::vector<DocumentRecord> documents, std::vector<TableCellRecord> cells, const FoldConfig& folds)
    : documents_(std::move(documents)), cells_(std::move(cells)), topic_order_(folds.topics) {
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        auto& doc = documents_[i];
        if (doc.id.empty()) throw ParseError("document with empty id");
        if (!doc_pos_.emplace(doc.id, i).second) schema_error(doc.id, "id", "duplicate document id");
        if (std::find(topic_order_.begin(), topic_order_.end(), doc.topic_fold) == topic_order_.end()) {
            schema_error(doc.id, "topic_fold", "'" + doc.topic_fold + "' is not in the fold vocabulary");
        }
        if (doc.sentences.empty()) schema_error(doc.id, "sentences", "must be non-empty");
        std::set<int> ref_indices;
        for (const auto& r : doc.references) {
            if (r.index_in_reference_section < 1) schema_error(doc.id, "references.index", "must be >= 1");
            if (!ref_indices.insert(r.index_in_reference_section).second) {
                schema_error(doc.id, "references.index", "duplicate index " + std::to_string(r.index_in_reference_section));
            }
        }
        std::set<std::string> table_ids;
        for (const auto& t : doc.tables) {
            if (!table_ids.insert(t.id).second) schema_error(doc.id, "tables.id", "duplicate table id " + t.id);
            if (t.rows() == 0 || t.cols() == 0) schema_error(doc.id, "grid", "table " + t.id + " must be at least 1x1");
            for (const auto& row : t.grid) {
                if (row.size() != t.cols()) schema_error(doc.id, "grid", "table " + t.id + " is not rectangular");
            }
        }
        for (const auto& t : doc.tables) {
            if (!t.caption.empty() &&
                std::find(doc.sentences.begin(), doc.sentences.end(), t.caption) == doc.sentences.end()) {
                doc.sentences.push_back(t.caption);
            }
        }
    }

    for (std::size_t i = 0; i < cells_.size(); ++i) {
        auto& c = cells_[i];
        auto dit = doc_pos_.find(c.document_id);
        if (dit == doc_pos_.end()) schema_error(c.document_id, "document_id", "unknown document");
        const auto& doc = documents_[dit->second];
        const auto* table = doc.find_table(c.table_id);
        if (!table) schema_error(doc.id, "table_id", "unknown table " + c.table_id);
        if (c.row < 0 || c.col < 0 || static_cast<std::size_t>(c.row) >= table->rows() ||
            static_cast<std::size_t>(c.col) >= table->cols()) {
            schema_error(doc.id, "row/col", "cell " + to_string(c.key()) + " lies outside the grid");
        }
        if (c.raw_text != table->at(c.row, c.col)) {
            schema_error(doc.id, "raw_text", "cell " + to_string(c.key()) + " does not match the grid");
        }
        if (c.gold_link) {
            if (!c.gold_cell_type || !is_linkable(*c.gold_cell_type)) {
                schema_error(doc.id, "gold_link",
                             "cell " + to_string(c.key()) + " has a link but its cell type is not dataset, method or dataset_and_metric");
            }
            if (c.gold_link->empty()) schema_error(doc.id, "gold_link", "empty link");
        }
        if (c.gold_attributed_sources) {
            for (const auto& s : *c.gold_attributed_sources) {
                if (s.kind == SourceKind::reference && !doc.find_reference(s.reference_index)) {
                    schema_error(doc.id, "gold_attributed_sources",
                                 "cell " + to_string(c.key()) + " points to missing reference " +
                                     std::to_string(s.reference_index));
                }
            }
        }
        if (!cell_pos_.emplace(c.key(), i).second) schema_error(doc.id, "cell", "duplicate cell " + to_string(c.key()));
    }
}

const DocumentRecord& Corpus::document(std::string_view id) const {
    auto it = doc_pos_.find(id);
    if (it == doc_pos_.end()) throw NotFoundError("unknown document: " + std::string(id));
    return documents_[it->second];
}

const TableRecord& Corpus::table(std::string_view document_id, std::string_view table_id) const {
    const auto* t = document(document_id).find_table(table_id);
    if (!t) throw NotFoundError("unknown table " + std::string(table_id) + " in document " + std::string(document_id));
    return *t;
}

const TableCellRecord* Corpus::find_cell(const CellKey& key) const {
    auto it = cell_pos_.find(key);
    return it == cell_pos_.end() ? nullptr : &cells_[it->second];
}

std::vector<const TableCellRecord*> Corpus::cells_in_topics(const std::vector<std::string>& topics) const {
    std::vector<const TableCellRecord*> out;
    for (const auto& c : cells_) {
        const auto& topic = document(c.document_id).topic_fold;
        if (std::find(topics.begin(), topics.end(), topic) != topics.end()) out.push_back(&c);
    }
    return out;
}

std::vector<std::string> Corpus::topics_present() const {
    std::vector<std::string> out;
    for (const auto& t : topic_order_) {
        if (std::any_of(documents_.begin(), documents_.end(), [&](const auto& d) { return d.topic_fold == t; })) {
            out.push_back(t);
        }
    }
    return out;
}

std::size_t Corpus::num_ctc_cells() const {
    return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return c.gold_cell_type.has_value(); }));
}

std::size_t Corpus::num_asm_cells() const {
    return static_cast<std::size_t>(
        std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return c.gold_attributed_sources.has_value(); }));
}

std::size_t Corpus::num_el_cells() const {
    return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return c.gold_link.has_value(); }));
}

// ---------------------------------------------------------------------------
// IO

namespace {

std::set<SourceCandidate> parse_sources(const Json& j) {
    if (!j.is_array()) throw ParseError("field 'gold_attributed_sources' must be an array or null");
    std::set<SourceCandidate> out;
    for (const auto& v : j) {
        if (v.is_string() && v.get<std::string>() == "SELF") {
            out.insert(SourceCandidate::self());
        } else if (v.is_number_integer()) {
            out.insert(SourceCandidate::reference(v.get<int>()));
        } else {
            throw ParseError("field 'gold_attributed_sources' entries must be \"SELF\" or an integer");
        }
    }
    return out;
}

OrderedJson optional_json(const std::optional<std::string>& v) {
    return v ? OrderedJson(*v) : OrderedJson(nullptr);
}

OrderedJson optional_json(const std::optional<int>& v) {
    return v ? OrderedJson(*v) : OrderedJson(nullptr);
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& dir, const FoldConfig& folds) {
    std::vector<DocumentRecord> documents;
    std::map<std::string, std::size_t> doc_index;
    for_each_jsonl(dir / kDocumentsFile, [&](const Json& j, std::size_t) {
        DocumentRecord d;
        d.id = require_string(j, "id");
        d.topic_fold = require_string(j, "topic_fold");
        d.title = string_or_empty(j, "title");
        d.abstract = string_or_empty(j, "abstract");
        d.kb_paper_id = optional_string(j, "kb_paper_id");
        if (!j.contains("sentences") || !j["sentences"].is_array()) schema_error(d.id, "sentences", "must be an array");
        for (const auto& s : j["sentences"]) {
            if (!s.is_string()) schema_error(d.id, "sentences", "entries must be strings");
            d.sentences.push_back(s.get<std::string>());
        }
        if (auto it = j.find("references"); it != j.end() && !it->is_null()) {
            if (!it->is_array()) schema_error(d.id, "references", "must be an array");
            for (const auto& r : *it) {
                ReferenceEntry e;
                e.index_in_reference_section = static_cast<int>(require_int(r, "index"));
                e.first_author_last_name = string_or_empty(r, "first_author_last_name");
                e.year = optional_int(r, "year");
                e.title = string_or_empty(r, "title");
                e.abstract = string_or_empty(r, "abstract");
                e.matched_kb_paper_id = optional_string(r, "matched_kb_paper_id");
                d.references.push_back(std::move(e));
            }
        }
        doc_index[d.id] = documents.size();
        documents.push_back(std::move(d));
    });
    for_each_jsonl(dir / kTablesFile, [&](const Json& j, std::size_t) {
        const auto doc_id = require_string(j, "document_id");
        auto it = doc_index.find(doc_id);
        if (it == doc_index.end()) schema_error(doc_id, "document_id", "table refers to unknown document");
        TableRecord t;
        t.id = require_string(j, "id");
        t.caption = string_or_empty(j, "caption");
        if (!j.contains("grid") || !j["grid"].is_array()) schema_error(doc_id, "grid", "must be a 2-D array");
        for (const auto& row : j["grid"]) {
            if (!row.is_array()) schema_error(doc_id, "grid", "rows must be arrays");
            std::vector<std::string> r;
            for (const auto& cell : row) {
                if (!cell.is_string()) schema_error(doc_id, "grid", "cells must be strings");
                r.push_back(cell.get<std::string>());
            }
            t.grid.push_back(std::move(r));
        }
        documents[it->second].tables.push_back(std::move(t));
    });
    std::vector<TableCellRecord> cells;
    for_each_jsonl(dir / kCellsFile, [&](const Json& j, std::size_t) {
        TableCellRecord c;
        c.document_id = require_string(j, "document_id");
        c.table_id = require_string(j, "table_id");
        c.row = static_cast<int>(require_int(j, "row"));
        c.col = static_cast<int>(require_int(j, "col"));
        if (auto raw = optional_string(j, "raw_text")) {
            c.raw_text = *raw;
        } else if (auto it = doc_index.find(c.document_id); it != doc_index.end()) {
            if (const auto* t = documents[it->second].find_table(c.table_id);
                t && c.row >= 0 && c.col >= 0 && static_cast<std::size_t>(c.row) < t->rows() &&
                static_cast<std::size_t>(c.col) < t->cols()) {
                c.raw_text = t->at(c.row, c.col);
            }
        }
        if (auto type = optional_string(j, "gold_cell_type")) {
            auto parsed = parse_cell_type(*type);
            if (!parsed) schema_error(c.document_id, "gold_cell_type", "unknown cell type '" + *type + "'");
            c.gold_cell_type = *parsed;
        }
        if (auto it = j.find("gold_attributed_sources"); it != j.end() && !it->is_null()) {
            c.gold_attributed_sources = parse_sources(*it);
        }
        c.gold_link = optional_string(j, "gold_link");
        cells.push_back(std::move(c));
    });
    return Corpus(std::move(documents), std::move(cells), folds);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    JsonlWriter dw(dir / kDocumentsFile);
    JsonlWriter tw(dir / kTablesFile);
    for (const auto& d : corpus.documents()) {
        OrderedJson j;
        j["id"] = d.id;
        j["topic_fold"] = d.topic_fold;
        j["title"] = d.title;
        j["abstract"] = d.abstract;
        j["kb_paper_id"] = optional_json(d.kb_paper_id);
        j["sentences"] = d.sentences;
        OrderedJson refs = OrderedJson::array();
        for (const auto& r : d.references) {
            OrderedJson rj;
            rj["index"] = r.index_in_reference_section;
            rj["first_author_last_name"] = r.first_author_last_name;
            rj["year"] = optional_json(r.year);
            rj["title"] = r.title;
            rj["abstract"] = r.abstract;
            rj["matched_kb_paper_id"] = optional_json(r.matched_kb_paper_id);
            refs.push_back(std::move(rj));
        }
        j["references"] = std::move(refs);
        dw.write(j);
        for (const auto& t : d.tables) {
            OrderedJson tj;
            tj["document_id"] = d.id;
            tj["id"] = t.id;
            tj["caption"] = t.caption;
            tj["grid"] = t.grid;
            tw.write(tj);
        }
    }
    dw.close();
    tw.close();
    JsonlWriter cw(dir / kCellsFile);
    for (const auto& c : corpus.cells()) {
        OrderedJson j;
        j["document_id"] = c.document_id;
        j["table_id"] = c.table_id;
        j["row"] = c.row;
        j["col"] = c.col;
        j["raw_text"] = c.raw_text;
        j["gold_cell_type"] = c.gold_cell_type ? OrderedJson(std::string(to_string(*c.gold_cell_type))) : OrderedJson(nullptr);
        if (c.gold_attributed_sources) {
            OrderedJson s = OrderedJson::array();
            for (const auto& src : *c.gold_attributed_sources) {
                if (src.kind == SourceKind::self) s.push_back("SELF");
                else s.push_back(src.reference_index);
            }
            j["gold_attributed_sources"] = std::move(s);
        } else {
            j["gold_attributed_sources"] = nullptr;
        }
        j["gold_link"] = optional_json(c.gold_link);
        cw.write(j);
    }
    cw.close();
}

// ---------------------------------------------------------------------------
// Validation and folds

namespace {

constexpr std::array<double, kNumCellTypes> kExpectedCellTypeShare = {0.74, 0.08, 0.14, 0.03, 0.004};
constexpr std::array<double, 3> kExpectedAttributionShare = {0.166, 0.119, 0.715};
constexpr double kExpectedOutKBShare = 0.428;

std::string percent(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(1) << 100.0 * v << "%";
    return ss.str();
}

void check_share(const ClassShare& s, std::string_view group, std::vector<std::string>& warnings) {
    if (std::abs(s.fraction - s.expected) > kDistributionTolerance) {
        warnings.push_back(std::string(group) + " share of '" + s.label + "' is " + percent(s.fraction) +
                           ", reference " + percent(s.expected));
    }
}

}  // namespace

ValidationReport validate_corpus(const Corpus& corpus) {
    ValidationReport r;
    std::array<std::size_t, kNumCellTypes> type_counts{};
    std::array<std::size_t, 3> attribution_counts{};
    for (const auto& c : corpus.cells()) {
        if (c.gold_cell_type) {
            ++r.ctc_cells;
            ++type_counts[static_cast<std::size_t>(*c.gold_cell_type)];
        }
        if (c.gold_attributed_sources) {
            ++r.asm_cells;
            const auto& s = *c.gold_attributed_sources;
            if (s.empty()) ++attribution_counts[0];
            else if (s.count(SourceCandidate::self())) ++attribution_counts[1];
            else ++attribution_counts[2];
        }
        if (c.gold_link) {
            ++r.el_cells;
            if (c.gold_is_outkb()) ++r.outkb_cells;
        }
    }
    auto share = [](std::size_t n, std::size_t total) {
        return total == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(total);
    };
    for (std::size_t i = 0; i < kNumCellTypes; ++i) {
        r.cell_types.push_back({std::string(to_string(kCellTypes[i])), type_counts[i], share(type_counts[i], r.ctc_cells),
                                kExpectedCellTypeShare[i]});
    }
    const std::array<std::string, 3> attribution_labels = {"missing", "self", "reference"};
    for (std::size_t i = 0; i < 3; ++i) {
        r.attribution.push_back({attribution_labels[i], attribution_counts[i], share(attribution_counts[i], r.asm_cells),
                                 kExpectedAttributionShare[i]});
    }
    r.outkb_fraction = share(r.outkb_cells, r.el_cells);

    if (r.ctc_cells == 0) {
        r.warnings.push_back("no cell-type annotations");
    } else {
        for (const auto& s : r.cell_types) check_share(s, "cell type", r.warnings);
    }
    if (r.asm_cells == 0) {
        r.warnings.push_back("no attributed-source annotations");
    } else {
        for (const auto& s : r.attribution) check_share(s, "attribution", r.warnings);
    }
    if (r.el_cells == 0) {
        r.warnings.push_back("no entity-link annotations");
    } else if (std::abs(r.outkb_fraction - kExpectedOutKBShare) > kDistributionTolerance) {
        r.warnings.push_back("outKB share is " + percent(r.outkb_fraction) + ", reference " + percent(kExpectedOutKBShare));
    }

    for (const auto& topic : corpus.topics_present()) {
        TopicCounts t;
        t.topic = topic;
        for (const auto& d : corpus.documents()) {
            if (d.topic_fold != topic) continue;
            ++t.documents;
            t.tables += d.tables.size();
        }
        for (const auto* c : corpus.cells_in_topics({topic})) {
            t.ctc_cells += c->gold_cell_type.has_value();
            t.asm_cells += c->gold_attributed_sources.has_value();
            t.el_cells += c->gold_link.has_value();
        }
        r.per_topic.push_back(std::move(t));
    }
    return r;
}

std::string ValidationReport::to_text() const {
    std::ostringstream out;
    out << "cells: ctc=" << ctc_cells << " asm=" << asm_cells << " el=" << el_cells << "\n";
    out << "cell types:\n";
    for (const auto& s : cell_types) out << "  " << s.label << " " << s.count << " (" << percent(s.fraction) << ")\n";
    out << "attribution:\n";
    for (const auto& s : attribution) out << "  " << s.label << " " << s.count << " (" << percent(s.fraction) << ")\n";
    out << "outKB: " << outkb_cells << " (" << percent(outkb_fraction) << ")\n";
    out << "per topic (documents tables ctc asm el):\n";
    for (const auto& t : per_topic) {
        out << "  " << t.topic << " " << t.documents << " " << t.tables << " " << t.ctc_cells << " " << t.asm_cells << " "
            << t.el_cells << "\n";
    }
    for (const auto& w : warnings) out << "warning: " << w << "\n";
    return out.str();
}

std::vector<FoldSplit> make_folds(const Corpus& corpus, const FoldConfig& config) {
    const auto topics = corpus.topics_present();
    if (topics.size() < 3) {
        throw ConfigError("cross-domain folds need at least 3 topics, found " + std::to_string(topics.size()));
    }
    if (std::find(topics.begin(), topics.end(), config.validation_topic) == topics.end()) {
        throw ConfigError("validation topic '" + config.validation_topic + "' is not present in the corpus");
    }
    std::vector<FoldSplit> folds;
    for (const auto& test : topics) {
        if (test == config.validation_topic) continue;
        FoldSplit f;
        f.validation_topic = config.validation_topic;
        f.test_topic = test;
        for (const auto& t : topics) {
            if (t != test && t != config.validation_topic) f.train_topics.push_back(t);
        }
        folds.push_back(std::move(f));
    }
    return folds;
}

}  // namespace tablelink
