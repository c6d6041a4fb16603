#include "rmtkit/io_util.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <system_error>

namespace rmtkit {

const char* const kToolVersion = "0.1.0";

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& body) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    fs::path tmp = dir / (target.filename().string() + ".tmp");
    {
        std::FILE* f = std::fopen(tmp.c_str(), "wb");
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        size_t wrote = std::fwrite(body.data(), 1, body.size(), f);
        int rc = std::fclose(f);
        if (wrote != body.size() || rc != 0) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

void write_csv(const std::string& path, const CsvTable& t) {
    std::string body;
    auto put_row = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) body += ',';
            body += row[i];
        }
        body += '\n';
    };
    put_row(t.header);
    for (const auto& row : t.rows) put_row(row);
    write_text_atomic(path, body);
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace rmtkit
