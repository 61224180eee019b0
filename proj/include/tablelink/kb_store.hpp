// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tablelink/bm25.hpp"

namespace tablelink {

enum class EntityKind { method, dataset };

std::string_view to_string(EntityKind kind) noexcept;
std::optional<EntityKind> parse_entity_kind(std::string_view text) noexcept;

struct Entity {
    std::string id;
    EntityKind kind = EntityKind::method;
    std::string abbreviation;
    std::string full_name;
    std::string description;

    bool operator==(const Entity&) const = default;
};

struct KBPaper {
    std::string id;
    std::string title;
    std::string abstract;
    std::optional<int> year;
    std::optional<std::string> first_author_last_name;

    bool operator==(const KBPaper&) const = default;
};

struct PaperEntityRelation {
    std::string paper_id;
    std::string entity_id;

    bool operator==(const PaperEntityRelation&) const = default;
};

struct LexicalIndexConfig {
    Bm25Params bm25{};
    double full_name_weight = 3.0;
    double abbreviation_weight = 2.0;
    double description_weight = 1.0;
};

struct ScoredEntity {
    const Entity* entity = nullptr;
    double score = 0.0;
};

// Immutable after construction; safe for concurrent readers.
class KBStore {
public:
    KBStore() : KBStore({}, {}, {}) {}

    // Validates every invariant (unique ids, non-empty names/titles, relation
    // ids resolve, relation pairs unique) and builds the lexical index.
    // Throws ParseError on violation.
    KBStore(std::vector<Entity> entities, std::vector<KBPaper> papers,
            std::vector<PaperEntityRelation> relations, LexicalIndexConfig index_config = {});

    std::size_t num_entities() const noexcept { return entities_.size(); }
    std::size_t num_entities(EntityKind kind) const noexcept;
    std::size_t num_papers() const noexcept { return papers_.size(); }
    std::size_t num_relations() const noexcept { return relations_.size(); }

    // Entities ordered by ascending id.
    std::span<const Entity> entities() const noexcept { return entities_; }
    std::span<const KBPaper> papers() const noexcept { return papers_; }
    std::span<const PaperEntityRelation> relations() const noexcept { return relations_; }

    const Entity* find_entity(std::string_view id) const;
    const Entity& entity(std::string_view id) const;
    const KBPaper* find_paper(std::string_view id) const;

    // Related entities in ascending id order. Throws NotFoundError for an
    // unknown paper id.
    std::vector<const Entity*> entities_for_paper(std::string_view paper_id,
                                                  std::optional<EntityKind> kind = std::nullopt) const;

    // At most k hits with positive score, score descending, ties by entity id.
    // Collection statistics are over the whole store regardless of the filter.
    std::vector<ScoredEntity> search_bm25f(std::string_view query, std::optional<EntityKind> kind,
                                           std::size_t k) const;

    const LexicalIndexConfig& index_config() const noexcept { return index_config_; }

private:
    std::vector<Entity> entities_;
    std::vector<KBPaper> papers_;
    std::vector<PaperEntityRelation> relations_;
    std::unordered_map<std::string, std::size_t> entity_pos_;
    std::unordered_map<std::string, std::size_t> paper_pos_;
    std::unordered_map<std::string, std::vector<std::size_t>> paper_entities_;
    LexicalIndexConfig index_config_;
    FieldedBm25Index index_;
};

inline constexpr std::string_view kEntitiesFile = "entities.jsonl";
inline constexpr std::string_view kPapersFile = "papers.jsonl";
inline constexpr std::string_view kRelationsFile = "relations.jsonl";

// Reads entities.jsonl, papers.jsonl and relations.jsonl from dump_dir.
KBStore ingest_kb(const std::filesystem::path& dump_dir, LexicalIndexConfig index_config = {});

// Writes the store back in the canonical three-file layout.
void write_kb(const KBStore& store, const std::filesystem::path& out_dir);

struct DumpConversionReport {
    std::size_t methods = 0;
    std::size_t datasets = 0;
    std::size_t papers = 0;
    std::size_t relations = 0;
    std::size_t unresolved_relations = 0;
    std::size_t skipped_records = 0;
};

// Converts the public Papers-with-Code JSON dump (methods.json, datasets.json,
// papers-with-abstracts.json) into the canonical layout. Field names are mapped
// across dump versions; unmapped fields are dropped.
DumpConversionReport convert_public_dump(const std::filesystem::path& source_dir,
                                         const std::filesystem::path& out_dir);

bool is_public_dump_dir(const std::filesystem::path& dir);

}  // namespace tablelink
