#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "arb/error.hpp"

namespace arb {

/// Shortest round-trippable-ish text form used in every emitted table.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string format_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : "unreachable";
}

/**
 * Tab-separated table with `# key=value` comment lines above the header row.
 * Output is byte-deterministic: comments keep insertion order, values print
 * with %.12g.
 */
class TableWriter {
public:
    explicit TableWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
        if (columns_.empty()) throw Error(Errc::bad_config, "table needs at least one column");
    }

    void set_comment(const std::string& key, const std::string& value) {
        for (auto& kv : comments_)
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        comments_.emplace_back(key, value);
    }

    void set_comment(const std::string& key, double value) { set_comment(key, format_double(value)); }

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != columns_.size())
            throw Error(Errc::bad_config, "row width does not match the table header");
        rows_.push_back(std::move(cells));
    }

    std::string str() const {
        std::string out;
        for (const auto& [k, v] : comments_) {
            out += "# ";
            out += k;
            out += '=';
            out += v;
            out += '\n';
        }
        append_row(out, columns_);
        for (const auto& row : rows_) append_row(out, row);
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(Errc::io_error, "cannot write table '" + path + "'");
        f << str();
        if (!f) throw Error(Errc::io_error, "short write to '" + path + "'");
    }

private:
    static void append_row(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += '\t';
            out += cells[i];
        }
        out += '\n';
    }

    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> comments_;
    std::vector<std::vector<std::string>> rows_;
};

/** Machine-readable index of the files one command emitted. */
class Manifest {
public:
    explicit Manifest(std::string command) : command_(std::move(command)) {}

    void add(const std::string& path, const std::string& description) {
        entries_.push_back({path, description});
    }

    void save(const std::string& path) const {
        nlohmann::json j{{"schema", "arbkit-manifest-v1"}, {"command", command_}};
        j["outputs"] = nlohmann::json::array();
        for (const auto& e : entries_)
            j["outputs"].push_back({{"path", e.first}, {"description", e.second}});
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(Errc::io_error, "cannot write manifest '" + path + "'");
        f << j.dump(2) << '\n';
    }

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

} // namespace arb
