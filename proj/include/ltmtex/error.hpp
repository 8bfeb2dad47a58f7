#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ltmtex {

/// Raised when an argument or configuration violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ImageErrorKind {
    MissingFile,
    MalformedHeader,
    UnsupportedDepth,
    MalformedPayload,
};

std::string_view to_string(ImageErrorKind kind);

/// Failure while decoding or encoding an image file.
class ImageError : public std::runtime_error {
public:
    ImageError(ImageErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ImageErrorKind kind() const noexcept { return kind_; }

private:
    ImageErrorKind kind_;
};

/// Manifest or dataset-layout problem; the message names the offending file and line.
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ltmtex
