// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tablelink {

// Lexical tokenization used by every BM25/BM25F index: lowercase ASCII,
// split on ASCII non-alphanumerics, keep digits. Bytes >= 0x80 are word
// characters so UTF-8 text is not split mid-codepoint.
std::vector<std::string> lexical_tokens(std::string_view text);

// Whitespace split followed by splitting ASCII punctuation into single-character
// tokens. Case is preserved; this is the word-level split used for encoder input.
std::vector<std::string> word_tokens(std::string_view text);

std::vector<std::string> split_whitespace(std::string_view text);

std::string to_lower(std::string_view text);
std::string_view trim(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// One step of the splitmix64 generator; advances state.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace tablelink
