// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include "tablelink/kb_store.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "tablelink/errors.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/text.hpp"

namespace tablelink {

std::string_view to_string(EntityKind kind) noexcept {
    return kind == EntityKind::method ? "method" : "dataset";
}

std::optional<EntityKind> parse_entity_kind(std::string_view text) noexcept {
    if (text == "method") return EntityKind::method;
    if (text == "dataset") return EntityKind::dataset;
    return std::nullopt;
}

KBStore::KBStore(std::vector<Entity> entities, std::vector<KBPaper> papers,
                 std::vector<PaperEntityRelation> relations, LexicalIndexConfig index_config)
    : entities_(std::move(entities)),
      papers_(std::move(papers)),
      relations_(std::move(relations)),
      index_config_(index_config),
      index_({index_config.abbreviation_weight, index_config.full_name_weight, index_config.description_weight},
             index_config.bm25) {
    std::sort(entities_.begin(), entities_.end(), [](const Entity& a, const Entity& b) { return a.id < b.id; });
    std::sort(papers_.begin(), papers_.end(), [](const KBPaper& a, const KBPaper& b) { return a.id < b.id; });

    for (std::size_t i = 0; i < entities_.size(); ++i) {
        const auto& e = entities_[i];
        if (e.id.empty()) throw ParseError("entity with empty id");
        if (e.id == "OUTKB") throw ParseError("entity id OUTKB is reserved for out-of-KB decisions");
        if (e.full_name.empty()) throw ParseError("entity " + e.id + ": full_name must be non-empty");
        if (!entity_pos_.emplace(e.id, i).second) throw ParseError("duplicate entity id: " + e.id);
    }
    for (std::size_t i = 0; i < papers_.size(); ++i) {
        const auto& p = papers_[i];
        if (p.id.empty()) throw ParseError("paper with empty id");
        if (p.title.empty()) throw ParseError("paper " + p.id + ": title must be non-empty");
        if (!paper_pos_.emplace(p.id, i).second) throw ParseError("duplicate paper id: " + p.id);
    }

    std::vector<std::string> dangling;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : relations_) {
        const bool paper_ok = paper_pos_.count(r.paper_id) > 0;
        const bool entity_ok = entity_pos_.count(r.entity_id) > 0;
        if (!paper_ok) dangling.push_back("paper:" + r.paper_id);
        if (!entity_ok) dangling.push_back("entity:" + r.entity_id);
        if (!paper_ok || !entity_ok) continue;
        if (!seen.emplace(r.paper_id, r.entity_id).second) {
            throw ParseError("duplicate relation: " + r.paper_id + " -> " + r.entity_id);
        }
        paper_entities_[r.paper_id].push_back(entity_pos_.at(r.entity_id));
    }
    if (!dangling.empty()) {
        std::sort(dangling.begin(), dangling.end());
        dangling.erase(std::unique(dangling.begin(), dangling.end()), dangling.end());
        throw ParseError("relations reference unknown ids: " + join(dangling, ", "));
    }
    // Entity positions follow id order, so sorting positions gives canonical order.
    for (auto& [paper, list] : paper_entities_) std::sort(list.begin(), list.end());
    std::sort(relations_.begin(), relations_.end(), [](const auto& a, const auto& b) {
        return std::tie(a.paper_id, a.entity_id) < std::tie(b.paper_id, b.entity_id);
    });

    for (const auto& e : entities_) index_.add_document({e.abbreviation, e.full_name, e.description});
}

std::size_t KBStore::num_entities(EntityKind kind) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(entities_.begin(), entities_.end(), [kind](const Entity& e) { return e.kind == kind; }));
}

const Entity* KBStore::find_entity(std::string_view id) const {
    auto it = entity_pos_.find(std::string(id));
    return it == entity_pos_.end() ? nullptr : &entities_[it->second];
}

const Entity& KBStore::entity(std::string_view id) const {
    if (const auto* e = find_entity(id)) return *e;
    throw NotFoundError("unknown entity id: " + std::string(id));
}

const KBPaper* KBStore::find_paper(std::string_view id) const {
    auto it = paper_pos_.find(std::string(id));
    return it == paper_pos_.end() ? nullptr : &papers_[it->second];
}

std::vector<const Entity*> KBStore::entities_for_paper(std::string_view paper_id,
                                                       std::optional<EntityKind> kind) const {
    const std::string key(paper_id);
    if (paper_pos_.count(key) == 0) throw NotFoundError("unknown paper id: " + key);
    std::vector<const Entity*> out;
    auto it = paper_entities_.find(key);
    if (it == paper_entities_.end()) return out;
    for (std::size_t pos : it->second) {
        const auto& e = entities_[pos];
        if (!kind || e.kind == *kind) out.push_back(&e);
    }
    return out;
}

std::vector<ScoredEntity> KBStore::search_bm25f(std::string_view query, std::optional<EntityKind> kind,
                                                std::size_t k) const {
    if (k == 0) throw ConfigError("search_bm25f: k must be positive");
    std::vector<ScoredEntity> out;
    if (trim(query).empty()) return out;
    for (const auto& hit : index_.search(query)) {
        const auto& e = entities_[hit.doc];
        if (kind && e.kind != *kind) continue;
        out.push_back({&e, hit.score});
        if (out.size() == k) break;
    }
    return out;
}

KBStore ingest_kb(const std::filesystem::path& dump_dir, LexicalIndexConfig index_config) {
    std::vector<Entity> entities;
    std::vector<KBPaper> papers;
    std::vector<PaperEntityRelation> relations;

    for_each_jsonl(dump_dir / kEntitiesFile, [&](const Json& j, std::size_t) {
        Entity e;
        e.id = require_string(j, "id");
        const auto kind_text = require_string(j, "kind");
        const auto kind = parse_entity_kind(kind_text);
        if (!kind) throw ParseError("field 'kind' must be method or dataset, got '" + kind_text + "'");
        e.kind = *kind;
        e.full_name = require_string(j, "full_name");
        if (e.full_name.empty()) throw ParseError("field 'full_name' must be non-empty");
        e.abbreviation = string_or_empty(j, "abbreviation");
        if (e.abbreviation.empty()) e.abbreviation = e.full_name;
        e.description = string_or_empty(j, "description");
        entities.push_back(std::move(e));
    });
    for_each_jsonl(dump_dir / kPapersFile, [&](const Json& j, std::size_t) {
        KBPaper p;
        p.id = require_string(j, "id");
        p.title = require_string(j, "title");
        if (p.title.empty()) throw ParseError("field 'title' must be non-empty");
        p.abstract = string_or_empty(j, "abstract");
        p.year = optional_int(j, "year");
        p.first_author_last_name = optional_string(j, "first_author_last_name");
        papers.push_back(std::move(p));
    });
    for_each_jsonl(dump_dir / kRelationsFile, [&](const Json& j, std::size_t) {
        relations.push_back({require_string(j, "paper_id"), require_string(j, "entity_id")});
    });
    return KBStore(std::move(entities), std::move(papers), std::move(relations), index_config);
}

void write_kb(const KBStore& store, const std::filesystem::path& out_dir) {
    JsonlWriter ew(out_dir / kEntitiesFile);
    for (const auto& e : store.entities()) {
        OrderedJson j;
        j["id"] = e.id;
        j["kind"] = std::string(to_string(e.kind));
        j["abbreviation"] = e.abbreviation;
        j["full_name"] = e.full_name;
        j["description"] = e.description;
        ew.write(j);
    }
    ew.close();
    JsonlWriter pw(out_dir / kPapersFile);
    for (const auto& p : store.papers()) {
        OrderedJson j;
        j["id"] = p.id;
        j["title"] = p.title;
        j["abstract"] = p.abstract;
        j["year"] = p.year ? OrderedJson(*p.year) : OrderedJson(nullptr);
        j["first_author_last_name"] =
            p.first_author_last_name ? OrderedJson(*p.first_author_last_name) : OrderedJson(nullptr);
        pw.write(j);
    }
    pw.close();
    JsonlWriter rw(out_dir / kRelationsFile);
    for (const auto& r : store.relations()) {
        OrderedJson j;
        j["paper_id"] = r.paper_id;
        j["entity_id"] = r.entity_id;
        rw.write(j);
    }
    rw.close();
}

// ---------------------------------------------------------------------------
// Public dump conversion

namespace {

constexpr std::string_view kMethodsDump = "methods.json";
constexpr std::string_view kDatasetsDump = "datasets.json";
constexpr std::string_view kPapersDump = "papers-with-abstracts.json";

// First key present with a non-null value.
const Json* pick(const Json& j, std::initializer_list<std::string_view> keys) {
    for (auto key : keys) {
        auto it = j.find(key);
        if (it != j.end() && !it->is_null()) return &*it;
    }
    return nullptr;
}

std::string pick_string(const Json& j, std::initializer_list<std::string_view> keys) {
    const Json* v = pick(j, keys);
    return (v && v->is_string()) ? v->get<std::string>() : std::string{};
}

std::string last_path_segment(std::string url) {
    while (!url.empty() && url.back() == '/') url.pop_back();
    auto pos = url.find_last_of('/');
    return pos == std::string::npos ? url : url.substr(pos + 1);
}

std::string slug(std::string_view text) {
    return join(lexical_tokens(text), "-");
}

Json load_json_array(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const Json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw ParseError(path.string() + ": expected a JSON array");
    return j;
}

std::string paper_key(const Json& p) {
    std::string url = pick_string(p, {"paper_url", "url"});
    if (!url.empty()) return last_path_segment(url);
    std::string arxiv = pick_string(p, {"arxiv_id", "arxiv"});
    if (!arxiv.empty()) return arxiv;
    return slug(pick_string(p, {"title", "paper_title"}));
}

}  // namespace

bool is_public_dump_dir(const std::filesystem::path& dir) {
    return std::filesystem::exists(dir / kMethodsDump) || std::filesystem::exists(dir / kDatasetsDump);
}

DumpConversionReport convert_public_dump(const std::filesystem::path& source_dir,
                                         const std::filesystem::path& out_dir) {
    DumpConversionReport report;
    std::map<std::string, Entity> entities;
    std::map<std::string, KBPaper> papers;
    std::set<std::pair<std::string, std::string>> relations;
    std::map<std::string, std::string> paper_by_title;  // lowercased title -> id
    std::map<std::string, std::string> method_by_name;  // lowercased name -> id

    // Papers first so entity "paper" fields can be resolved.
    std::vector<std::pair<std::string, std::vector<std::string>>> paper_methods;
    if (std::filesystem::exists(source_dir / kPapersDump)) {
        for (const auto& p : load_json_array(source_dir / kPapersDump)) {
            KBPaper paper;
            paper.id = paper_key(p);
            paper.title = pick_string(p, {"title", "paper_title"});
            if (paper.id.empty() || paper.title.empty()) {
                ++report.skipped_records;
                continue;
            }
            paper.abstract = pick_string(p, {"abstract", "paper_abstract"});
            if (const Json* year = pick(p, {"year"}); year && year->is_number_integer()) {
                paper.year = year->get<int>();
            } else {
                const auto date = pick_string(p, {"date", "published", "proceeding_date"});
                if (date.size() >= 4 && std::all_of(date.begin(), date.begin() + 4, [](unsigned char ch) { return std::isdigit(ch) != 0; })) {
                    paper.year = std::stoi(date.substr(0, 4));
                }
            }
            if (const Json* authors = pick(p, {"authors"}); authors && authors->is_array() && !authors->empty() &&
                                                           (*authors)[0].is_string()) {
                auto parts = split_whitespace((*authors)[0].get<std::string>());
                if (!parts.empty()) paper.first_author_last_name = parts.back();
            }
            std::vector<std::string> method_names;
            if (const Json* methods = pick(p, {"methods"}); methods && methods->is_array()) {
                for (const auto& m : *methods) {
                    if (m.is_string()) method_names.push_back(m.get<std::string>());
                    else if (m.is_object()) method_names.push_back(pick_string(m, {"name", "full_name"}));
                }
            }
            paper_by_title.emplace(to_lower(paper.title), paper.id);
            paper_methods.emplace_back(paper.id, std::move(method_names));
            if (papers.emplace(paper.id, std::move(paper)).second) ++report.papers;
        }
    }

    auto resolve_paper = [&](const Json& entity_record) -> std::string {
        const Json* ref = pick(entity_record, {"paper", "introduced_by", "introduced_in"});
        if (!ref || !ref->is_object()) return {};
        auto url = pick_string(*ref, {"url", "paper_url"});
        if (!url.empty()) {
            auto key = last_path_segment(url);
            if (papers.count(key)) return key;
        }
        auto it = paper_by_title.find(to_lower(pick_string(*ref, {"title", "paper_title"})));
        return it == paper_by_title.end() ? std::string{} : it->second;
    };

    auto load_entities = [&](std::string_view file, EntityKind kind, std::size_t& counter) {
        if (!std::filesystem::exists(source_dir / file)) return;
        for (const auto& r : load_json_array(source_dir / file)) {
            Entity e;
            e.kind = kind;
            const auto name = pick_string(r, {"name", "abbreviation", "short_name"});
            e.full_name = pick_string(r, {"full_name", "fullname", "title"});
            if (e.full_name.empty()) e.full_name = name;
            e.abbreviation = name.empty() ? e.full_name : name;
            e.description = pick_string(r, {"description", "desc"});
            auto url = pick_string(r, {"url", "paper_url"});
            const auto key = url.empty() ? slug(e.full_name) : last_path_segment(url);
            if (key.empty() || e.full_name.empty()) {
                ++report.skipped_records;
                continue;
            }
            e.id = std::string(to_string(kind)) + "/" + key;
            if (entities.count(e.id)) {
                ++report.skipped_records;
                continue;
            }
            if (kind == EntityKind::method) {
                method_by_name.emplace(to_lower(e.abbreviation), e.id);
                method_by_name.emplace(to_lower(e.full_name), e.id);
            }
            if (auto paper = resolve_paper(r); !paper.empty()) relations.emplace(paper, e.id);
            else if (pick(r, {"paper", "introduced_by", "introduced_in"})) ++report.unresolved_relations;
            entities.emplace(e.id, std::move(e));
            ++counter;
        }
    };
    load_entities(kMethodsDump, EntityKind::method, report.methods);
    load_entities(kDatasetsDump, EntityKind::dataset, report.datasets);

    for (const auto& [paper_id, names] : paper_methods) {
        for (const auto& name : names) {
            auto it = method_by_name.find(to_lower(name));
            if (it == method_by_name.end()) {
                ++report.unresolved_relations;
                continue;
            }
            relations.emplace(paper_id, it->second);
        }
    }
    report.relations = relations.size();

    std::vector<Entity> ev;
    for (auto& [id, e] : entities) ev.push_back(std::move(e));
    std::vector<KBPaper> pv;
    for (auto& [id, p] : papers) pv.push_back(std::move(p));
    std::vector<PaperEntityRelation> rv;
    for (const auto& [p, e] : relations) rv.push_back({p, e});
    write_kb(KBStore(std::move(ev), std::move(pv), std::move(rv)), out_dir);
    return report;
}

}  // namespace tablelink
