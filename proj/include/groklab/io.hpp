#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace groklab {

// FNV-1a 64-bit content hash; stable across platforms.
std::uint64_t fnv1a64(const std::string& data);
std::string hash_hex(std::uint64_t h);

// Temp-file-then-rename so interrupted runs never leave half artifacts.
void atomic_write(const std::filesystem::path& path, const std::string& content);

struct ManifestEntry {
    std::string file;
    std::string hash;
    std::size_t bytes = 0;
};

struct RunManifest {
    std::string config_hash;
    std::string tool_version;
    std::string started_at;
    std::string finished_at;
    std::vector<ManifestEntry> artifacts;

    void add(const std::filesystem::path& base, const std::string& relative,
             const std::string& content);
    std::string to_json() const;
};

std::string iso8601_now();

}  // namespace groklab
