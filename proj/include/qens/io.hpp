#ifndef QENS_IO_HPP
#define QENS_IO_HPP

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qens/types.hpp"

namespace qens::io {

inline constexpr const char* kVersion = "qens 0.1.0";

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<VecX> data;  // one vector per column, equal lengths
};

struct Scalar {
    std::string name;
    double value;
    std::optional<double> uncertainty;
};

// Run output with a full parameter echo; every emitted number is traceable
// to the configuration that produced it.
struct ResultBundle {
    std::string subcommand;
    std::map<std::string, std::string> params;
    std::uint64_t seed = 0;
    std::vector<Table> tables;
    std::vector<Scalar> scalars;
    std::optional<std::string> timestamp;  // only set when explicitly stamped

    void scalar(const std::string& name, double value) { scalars.push_back({name, value, std::nullopt}); }
    void scalar(const std::string& name, double value, double unc) { scalars.push_back({name, value, unc}); }
};

// write-temp-then-rename so partially written outputs are never observed
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move output into place: " + path);
}

inline std::string to_json(const ResultBundle& b) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["subcommand"] = b.subcommand;
    j["seed"] = b.seed;
    if (b.timestamp) j["timestamp"] = *b.timestamp;
    j["params"] = b.params;
    for (const auto& s : b.scalars) {
        nlohmann::json e;
        e["value"] = s.value;
        if (s.uncertainty) e["uncertainty"] = *s.uncertainty;
        j["scalars"][s.name] = e;
    }
    for (const auto& t : b.tables) {
        nlohmann::json cols = nlohmann::json::object();
        for (std::size_t c = 0; c < t.columns.size(); ++c)
            cols[t.columns[c]] = std::vector<double>(t.data[c].data(), t.data[c].data() + t.data[c].size());
        j["tables"][t.name] = cols;
    }
    return j.dump(2) + "\n";
}

inline std::string table_to_csv(const ResultBundle& b, const Table& t) {
    std::string out;
    out += std::string("# ") + kVersion + " subcommand=" + b.subcommand + " seed=" + std::to_string(b.seed) + "\n";
    for (const auto& [k, v] : b.params) out += "# " + k + " = " + v + "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
    out += "\n";
    const Eigen::Index rows = t.data.empty() ? 0 : t.data.front().size();
    char buf[40];
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < t.data.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", t.data[c][r]);
            out += (c ? "," : "") + std::string(buf);
        }
        out += "\n";
    }
    return out;
}

inline void write_bundle(const ResultBundle& b, const std::string& prefix) {
    write_file_atomic(prefix + ".json", to_json(b));
    for (const auto& t : b.tables) write_file_atomic(prefix + "." + t.name + ".csv", table_to_csv(b, t));
}

}  // namespace qens::io

#endif
