#include "groklab/io.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace groklab {

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw std::runtime_error("atomic_write: short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void RunManifest::add(const std::filesystem::path& base, const std::string& relative,
                      const std::string& content) {
    atomic_write(base / relative, content);
    artifacts.push_back({relative, hash_hex(fnv1a64(content)), content.size()});
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    nlohmann::json arts = nlohmann::json::array();
    for (const auto& a : artifacts)
        arts.push_back({{"file", a.file}, {"hash", a.hash}, {"bytes", a.bytes}});
    j["artifacts"] = std::move(arts);
    return j.dump(2);
}

std::string iso8601_now() {
    auto now = std::chrono::system_clock::now();
    auto tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&tt));
    return buf;
}

}  // namespace groklab
