// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tablelink {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Calls fn for each non-blank line of a JSONL file. Any parse or field error
// (including exceptions thrown from fn) is rethrown as ParseError prefixed with
// "<file>:<line>: ". A missing file raises MissingArtifactError.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json& record, std::size_t line)>& fn);

class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path);

    void write(const OrderedJson& record);
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

// Field accessors that throw ParseError naming the field.
std::string require_string(const Json& j, std::string_view key);
std::string string_or_empty(const Json& j, std::string_view key);
std::optional<std::string> optional_string(const Json& j, std::string_view key);
std::optional<int> optional_int(const Json& j, std::string_view key);
long long require_int(const Json& j, std::string_view key);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace tablelink
