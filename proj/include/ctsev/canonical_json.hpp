#pragma once

#include <filesystem>
#include <initializer_list>
#include <string_view>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ctsev {

using Json = nlohmann::json;

/// Reals rendered with 9 significant digits, independent of the C locale.
std::string format_real(double value);

/// Locale-independent decimal parse of the whole string; throws InvalidArgument.
double parse_real(std::string_view text);

/// Deterministic rendering: object keys sorted, two-space indent, scalar-only
/// arrays kept on one line, reals via format_real, trailing newline.
std::string canonical_dump(const Json& value);

void write_canonical_json(const Json& value, const std::filesystem::path& path);

/// Throws InvalidArgument if `j` is not an object or has a key outside `known`.
void require_known_keys(const Json& j, std::initializer_list<std::string_view> known, std::string_view what);

/// Parses a JSON file. Throws IoError / FormatError (with byte offset).
Json read_json_file(const std::filesystem::path& path);

/// Writes bytes verbatim; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

} // namespace ctsev
