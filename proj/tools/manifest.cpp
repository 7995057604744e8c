#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>

#include "ctsev/errors.hpp"
#include "cli.hpp"

namespace ctsev::cli {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256 init failed");
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[digest[i] >> 4];
        hex += kHex[digest[i] & 0xf];
    }
    return hex;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunManifest::RunManifest(std::string command, std::vector<std::string> arguments)
    : command_(std::move(command)), arguments_(std::move(arguments)), started_at_(utc_timestamp()) {}

void RunManifest::config(const std::string& name, Json value) { configs_[name] = std::move(value); }

void RunManifest::seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

void RunManifest::note(const std::string& key, Json value) { notes_[key] = std::move(value); }

namespace {

void digest_into(std::map<std::string, std::string>& dst, const fs::path& path) {
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::recursive_directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
                dst[entry.path().generic_string()] = sha256_file(entry.path());
        }
    } else if (fs::is_regular_file(path)) {
        dst[path.generic_string()] = sha256_file(path);
    }
}

} // namespace

void RunManifest::input(const fs::path& path) { digest_into(inputs_, path); }

void RunManifest::output(const fs::path& path) { digest_into(outputs_, path); }

Json RunManifest::to_json() const {
    Json j{{"tool", "ctsev"},
           {"version", kVersion},
           {"command", command_},
           {"arguments", arguments_},
           {"configs", configs_},
           {"seeds", seeds_},
           {"inputs", inputs_},
           {"outputs", outputs_},
           {"started_at", started_at_},
           {"finished_at", finished_at_}};
    if (!notes_.empty()) j["notes"] = notes_;
    return j;
}

void RunManifest::write(const fs::path& path) {
    finished_at_ = utc_timestamp();
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_canonical_json(to_json(), path);
}

fs::path manifest_path_for(const fs::path& out, bool out_is_directory) {
    if (out_is_directory) return out / "manifest.json";
    return out.parent_path() / (out.stem().string() + ".manifest.json");
}

} // namespace ctsev::cli
