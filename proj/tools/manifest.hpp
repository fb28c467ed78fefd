#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace giantpair::cli {

inline constexpr const char* manifest_name = "manifest.json";

struct ManifestEntry {
    std::string path;  // relative, '/'-separated
    std::string sha256;
    std::uintmax_t bytes = 0;
};

std::string sha256_file(const std::filesystem::path& path);

// Every regular file under `dir` except the manifest itself, sorted by path.
std::vector<ManifestEntry> scan_outputs(const std::filesystem::path& dir);

void write_manifest(const std::filesystem::path& dir, const nlohmann::json& config);

// Creates `dir`, first removing the files a previous manifest there lists.
// Anything else already present is left alone and rejected.
void prepare_output_dir(const std::filesystem::path& dir);

}  // namespace giantpair::cli
