#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ctsev/canonical_json.hpp"

namespace ctsev::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Record of one subcommand run: tool version, arguments, config snapshots,
/// seeds, input/output digests and UTC timestamps.
class RunManifest {
  public:
    RunManifest(std::string command, std::vector<std::string> arguments);

    void config(const std::string& name, Json value);
    void seed(const std::string& name, std::uint64_t value);
    /// Files are digested directly; directories contribute every regular file.
    void input(const std::filesystem::path& path);
    void output(const std::filesystem::path& path);
    void note(const std::string& key, Json value);

    Json to_json() const;
    /// Stamps the finish time and writes canonical JSON.
    void write(const std::filesystem::path& path);

  private:
    std::string command_;
    std::vector<std::string> arguments_;
    Json configs_ = Json::object();
    Json seeds_ = Json::object();
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
    Json notes_ = Json::object();
    std::string started_at_;
    std::string finished_at_;
};

/// Where a run writing `out` keeps its manifest: `out/manifest.json` for an
/// output directory, `<stem>.manifest.json` next to an output file.
std::filesystem::path manifest_path_for(const std::filesystem::path& out, bool out_is_directory);

std::string utc_timestamp();

} // namespace ctsev::cli
