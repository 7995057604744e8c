#include "ctsev/canonical_json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ctsev/errors.hpp"

namespace ctsev {

std::string format_real(double value) {
    if (!std::isfinite(value)) throw InvalidArgument("cannot render a non-finite real");
    if (value == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

double parse_real(std::string_view text) {
    double value = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw InvalidArgument("not a decimal number: '" + std::string(text) + "'");
    return value;
}

void require_known_keys(const Json& j, std::initializer_list<std::string_view> known, std::string_view what) {
    if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw InvalidArgument("unknown key '" + it.key() + "' in " + std::string(what));
    }
}

namespace {

bool is_scalar_array(const Json& v) {
    for (const auto& e : v) {
        if (e.is_object() || e.is_array()) return false;
    }
    return true;
}

void render(const Json& v, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (v.type()) {
    case Json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad;
            out += Json(it.key()).dump();
            out += ": ";
            render(it.value(), out, depth + 1);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    case Json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            return;
        }
        if (is_scalar_array(v)) {
            out += "[";
            bool first = true;
            for (const auto& e : v) {
                if (!first) out += ", ";
                first = false;
                render(e, out, depth + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        bool first = true;
        for (const auto& e : v) {
            if (!first) out += ",\n";
            first = false;
            out += pad;
            render(e, out, depth + 1);
        }
        out += "\n" + close_pad + "]";
        return;
    }
    case Json::value_t::number_float:
        out += format_real(v.get<double>());
        return;
    default:
        out += v.dump(-1, ' ', false, Json::error_handler_t::strict);
        return;
    }
}

} // namespace

std::string canonical_dump(const Json& value) {
    std::string out;
    render(value, out, 0);
    out += "\n";
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_canonical_json(const Json& value, const std::filesystem::path& path) {
    write_text_file(path, canonical_dump(value));
}

Json read_json_file(const std::filesystem::path& path) {
    std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw FormatError(path.string(), e.byte, "malformed JSON");
    }
}

} // namespace ctsev
