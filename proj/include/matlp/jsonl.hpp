#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "json.hpp"
#include "matlp/errors.hpp"

namespace matlp {

// Insertion-ordered JSON keeps emitted files deterministic and diffable.
using json = nlohmann::ordered_json;

namespace jsonl {

// Calls fn(line_number, object) for every non-blank line. Line numbers are
// 1-based and appear in every error message.
inline void for_each(const std::filesystem::path& path,
                     const std::function<void(size_t, const json&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded())
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": malformed JSON");
        fn(line_no, obj);
    }
}

inline std::string require_string(const json& obj, const char* key,
                                  const std::filesystem::path& path, size_t line_no) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": missing string field \"" + key + "\"");
    return it->get<std::string>();
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw ParseError("cannot open " + path.string() + " for writing");
    }

    void write(const json& obj) {
        out_ << obj.dump() << '\n';
        ++count_;
    }

    size_t count() const { return count_; }

    void close() {
        out_.close();
        if (!out_) throw ParseError("write failed: " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    size_t count_ = 0;
};

}  // namespace jsonl
}  // namespace matlp
