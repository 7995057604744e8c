#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "ctsev/volume.hpp"

namespace ctsev::fixtures {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ctsev-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Volume random_volume(std::mt19937_64& gen, Shape shape, Spacing spacing, float lo, float hi,
                            Unit unit = Unit::HU) {
    std::uniform_real_distribution<float> dist(lo, hi);
    std::vector<float> data(shape.voxels());
    for (auto& v : data) v = dist(gen);
    return Volume(shape, spacing, unit, std::move(data));
}

inline LabelMask random_mask(std::mt19937_64& gen, Shape shape, Spacing spacing, double p_lung, double p_inf) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::uint8_t> labels(shape.voxels());
    for (auto& l : labels) {
        const double r = u(gen);
        l = r < p_inf ? 2 : (r < p_inf + p_lung ? 1 : 0);
    }
    return LabelMask(shape, spacing, std::move(labels));
}

} // namespace ctsev::fixtures
