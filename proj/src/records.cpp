// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "tablelink/errors.hpp"
#include "tablelink/jsonl.hpp"
#include "tablelink/text.hpp"

namespace tablelink {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json& record, std::size_t line)>& fn) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError(path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const Json record = Json::parse(line);
            if (!record.is_object()) throw ParseError("record is not a JSON object");
            fn(record, line_no);
        } catch (const MissingArtifactError&) {
            throw;
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << path.string() << ":" << line_no << ": " << e.what();
            throw ParseError(msg.str());
        }
    }
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error("cannot open for writing: " + path.string());
}

void JsonlWriter::write(const OrderedJson& record) {
    out_ << record.dump() << '\n';
}

void JsonlWriter::close() {
    out_.close();
    if (out_.fail()) throw Error("write failed: " + path_.string());
}

std::string require_string(const Json& j, std::string_view key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw ParseError("field '" + std::string(key) + "' must be a string");
    return it->get<std::string>();
}

std::string string_or_empty(const Json& j, std::string_view key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) throw ParseError("field '" + std::string(key) + "' must be a string");
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const Json& j, std::string_view key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ParseError("field '" + std::string(key) + "' must be a string or null");
    return it->get<std::string>();
}

std::optional<int> optional_int(const Json& j, std::string_view key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw ParseError("field '" + std::string(key) + "' must be an integer or null");
    return it->get<int>();
}

long long require_int(const Json& j, std::string_view key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) throw ParseError("field '" + std::string(key) + "' must be an integer");
    return it->get<long long>();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError(path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << contents;
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace tablelink
