#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string source_dir() {
#ifdef METAEVOLVE_SOURCE_DIR
    return METAEVOLVE_SOURCE_DIR;
#else
    const char* env = std::getenv("METAEVOLVE_SOURCE_DIR");
    REQUIRE(env != nullptr);
    return env;
#endif
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// The reference values are assembled from fragments so this file itself
// passes the scan below.
std::vector<std::string> reference_values() {
    return {
        std::string("2.6") + "35",
        std::string("2.6") + "36",
        std::string("12.") + "89",
        std::string("4.165") + "78",
        std::string("1.45") + "57",
    };
}

} // namespace

TEST_CASE("benchmark docs list the literature targets as non-reproduced") {
    const fs::path doc = fs::path(source_dir()) / "docs" / "benchmarks.md";
    const std::string text = read_file(doc);
    for (const auto& value : reference_values()) {
        INFO("missing reference value " << value);
        REQUIRE(text.find(value) != std::string::npos);
    }
    REQUIRE(text.find("documentation targets only") != std::string::npos);
    REQUIRE(text.find("not expected to reproduce") != std::string::npos);
}

TEST_CASE("literature targets never appear in test or library sources") {
    const auto values = reference_values();
    std::vector<fs::path> scanned;
    const auto scan_dir = [&](const fs::path& dir, const std::string& ext) {
        if (!fs::exists(dir)) return;
        for (const auto& entry : fs::recursive_directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            if (entry.path().extension() != ext) continue;
            scanned.push_back(entry.path());
        }
    };
    const fs::path root = source_dir();
    scan_dir(root / "tests", ".cpp");
    scan_dir(root / "tests", ".hpp");
    scan_dir(root / "include", ".hpp");
    scan_dir(root / "tools", ".cpp");
    REQUIRE(scanned.size() >= 10);

    for (const auto& path : scanned) {
        const std::string text = read_file(path);
        for (const auto& value : values) {
            INFO(path.string() << " contains reference value " << value);
            REQUIRE(text.find(value) == std::string::npos);
        }
    }
}
