#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "groklab/io.hpp"

using namespace groklab;
namespace fs = std::filesystem;

TEST_CASE("fnv1a64: frozen reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hash_hex(0x1234abcdull) == "000000001234abcd");
}

TEST_CASE("atomic_write: writes content, leaves no temp file") {
    auto dir = fs::temp_directory_path() / "groklab_io_test";
    fs::remove_all(dir);
    auto path = dir / "sub" / "file.txt";
    atomic_write(path, "hello\n");
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    CHECK(line == "hello");
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
    atomic_write(path, "replaced");
    std::ifstream f2(path);
    std::getline(f2, line);
    CHECK(line == "replaced");
    fs::remove_all(dir);
}

TEST_CASE("manifest lists every artifact with its hash") {
    auto dir = fs::temp_directory_path() / "groklab_manifest_test";
    fs::remove_all(dir);
    RunManifest man;
    man.config_hash = hash_hex(fnv1a64("{}"));
    man.tool_version = "test";
    man.started_at = iso8601_now();
    man.add(dir, "a.csv", "x,y\n1,2\n");
    man.add(dir, "b.json", "{}");
    man.finished_at = iso8601_now();
    auto j = man.to_json();
    CHECK(j.find("a.csv") != std::string::npos);
    CHECK(j.find("b.json") != std::string::npos);
    CHECK(j.find(hash_hex(fnv1a64("{}"))) != std::string::npos);
    CHECK(man.artifacts.size() == 2);
    CHECK(fs::exists(dir / "a.csv"));
    fs::remove_all(dir);
}
