// Copyright (C) 2026 The tablelink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tablelink {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input record; message names file and line (or document and field).
class ParseError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Configuration or precondition violation on user-supplied settings.
class ConfigError : public Error {
public:
    using Error::Error;
};

// An upstream stage artifact is absent.
class MissingArtifactError : public Error {
public:
    explicit MissingArtifactError(const std::string& path)
        : Error("missing artifact: " + path), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace tablelink
