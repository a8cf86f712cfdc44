#pragma once

// File emission: CSV tables, JSON graph snapshots and trajectories.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "opnet/degree_master.hpp"
#include "opnet/graph.hpp"
#include "opnet/sim.hpp"

namespace opnet {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits, enough for an exact round trip.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

inline void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

/// Graph snapshot: {time, nodes:[{id, degree, opinion?}], edges:[[i,j],...]}.
inline nlohmann::json snapshot_json(const Network& net, double time, std::span<const double> opinions = {}) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < net.n_nodes(); ++i) {
        nlohmann::json node{{"id", i}, {"degree", net.degree(static_cast<NodeId>(i))}};
        if (!opinions.empty()) node["opinion"] = opinions[i];
        nodes.push_back(std::move(node));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : net.edges()) edges.push_back({e.a, e.b});
    return nlohmann::json{{"time", time}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
    finish_output(out, path);
}

/// Rows (c, p).
inline void write_distribution_csv(const std::filesystem::path& path, const DegreeDistribution& d) {
    auto out = open_output(path);
    out << "c,p\n";
    for (std::size_t c = 0; c < d.size(); ++c) out << c << ',' << format_double(d.probs[c]) << '\n';
    finish_output(out, path);
}

/// One row per time step: t, u, V, controlled_fraction, w_1..w_N.
inline void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& rec) {
    auto out = open_output(path);
    out << "t,u,V,controlled_fraction";
    const std::size_t n = rec.opinions.empty() ? 0 : rec.opinions.front().size();
    for (std::size_t i = 1; i <= n; ++i) out << ",w_" << i;
    out << '\n';
    for (std::size_t k = 0; k < rec.size(); ++k) {
        out << format_double(rec.times[k]) << ',' << format_double(rec.control[k]) << ','
            << format_double(rec.consensus[k]) << ',' << format_double(rec.controlled_fraction[k]);
        for (double w : rec.opinions[k]) out << ',' << format_double(w);
        out << '\n';
    }
    finish_output(out, path);
}

inline nlohmann::json trajectory_json(const TrajectoryRecord& rec) {
    return nlohmann::json{{"times", rec.times},
                          {"control", rec.control},
                          {"consensus", rec.consensus},
                          {"controlled_fraction", rec.controlled_fraction},
                          {"opinions", rec.opinions},
                          {"degrees", rec.degrees},
                          {"rewiring_events", rec.rewiring_events},
                          {"restored_events", rec.restored_events},
                          {"uncontrollable_steps", rec.uncontrollable_steps},
                          {"unconverged_mpc_steps", rec.unconverged_mpc_steps}};
}

/// Minimal CSV writer for header + rows of preformatted cells.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row) {
        if (row.size() != header_.size()) throw IoError("csv row width mismatch");
        rows_.push_back(std::move(row));
    }

    void write(const std::filesystem::path& path) const {
        auto out = open_output(path);
        write_line(out, header_);
        for (const auto& r : rows_) write_line(out, r);
        finish_output(out, path);
    }

private:
    static void write_line(std::ostream& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace opnet
