#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinecho/errors.hpp"
#include "spinecho/version.hpp"

namespace spinecho::cli {

using ordered_json = nlohmann::ordered_json;

/// Fixed-format double for CSV cells; byte-stable across runs and platforms.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct RunMeta {
    std::string subcommand;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string mode;
};

inline ordered_json meta_json(const RunMeta& meta) {
    ordered_json j;
    j["tool"] = "spinecho";
    j["version"] = version_string;
    j["subcommand"] = meta.subcommand;
    j["config_hash"] = hash_hex(meta.config_hash);
    j["seed"] = meta.seed;
    j["mode"] = meta.mode;
    return j;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const RunMeta& meta,
              const std::vector<std::string>& extra_meta, const std::string& header)
        : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot open output file '" + path + "'");
        out_ << "# spinecho " << version_string << "\n";
        out_ << "# subcommand: " << meta.subcommand << "\n";
        out_ << "# config_hash: " << hash_hex(meta.config_hash) << "\n";
        out_ << "# seed: " << meta.seed << "\n";
        out_ << "# mode: " << meta.mode << "\n";
        for (const auto& line : extra_meta) out_ << "# " << line << "\n";
        out_ << header << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ",";
            out_ << cells[i];
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

inline void write_json_file(const std::string& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << j.dump(2) << "\n";
}

} // namespace spinecho::cli
