#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace testing_support {

inline std::string fixture_path(const std::string& name) { return std::string(BUGENRICH_FIXTURES_DIR) + "/" + name; }

inline nlohmann::json load_json(const std::string& name) {
    std::ifstream in(fixture_path(name));
    return nlohmann::json::parse(in);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace testing_support
