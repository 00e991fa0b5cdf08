#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ilwlab/errors.hpp"
#include "ilwlab/evolution.hpp"
#include "ilwlab/experiments.hpp"
#include "ilwlab/version.hpp"

namespace ilwlab {

// Frozen CSV headers; a golden test pins these strings.
inline constexpr const char* kTrajectoryCsvHeader = "t,n,re_c,im_c";
inline constexpr const char* kDiagnosticsCsvHeader = "t,metric,value";
inline constexpr const char* kReportCsvHeader = "param,error,slope_window";

/// Shortest round-trippable decimal representation.
inline std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Whole-file atomic write: temp file in the target directory, then rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& body) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw FormatError("atomic_write: cannot open " + tmp.string());
        os << body;
        if (!os.good()) throw FormatError("atomic_write: short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// ExperimentReport <-> JSON.
// ---------------------------------------------------------------------------

inline void write_report(const std::filesystem::path& path, const ExperimentReport& r) {
    for (const auto& row : r.rows)
        for (double v : row)
            if (std::isnan(v)) throw FormatError("write_report: NaN value rejected");
    if (r.slope && std::isnan(*r.slope)) throw FormatError("write_report: NaN slope rejected");

    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["name"] = r.name;
    j["columns"] = r.columns;
    // Rows go through strings so that +-inf (a legal sentinel) round-trips.
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json jr = nlohmann::json::array();
        for (double v : row) jr.push_back(fmt_double(v));
        rows.push_back(jr);
    }
    j["rows"] = rows;
    if (r.slope) j["slope"] = *r.slope;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name},
                          {"value", c.value},
                          {"cmp", c.cmp},
                          {"threshold", c.threshold},
                          {"pass", c.pass}});
    j["checks"] = checks;
    j["passed"] = r.passed;
    j["config_echo"] = r.config_echo;
    j["seed"] = r.seed;
    j["version"] = r.version;
    atomic_write(path, j.dump(2) + "\n");
}

inline double parse_double_token(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw FormatError("parse_double_token: trailing junk in '" + s + "'");
    return v;
}

inline ExperimentReport read_report(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("read_report: cannot open " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("read_report: malformed JSON: ") + e.what());
    }
    try {
        if (!j.contains("schema_version") || j["schema_version"].get<int>() != kReportSchemaVersion)
            throw FormatError("read_report: schema version mismatch");
        ExperimentReport r;
        r.name = j.at("name").get<std::string>();
        r.columns = j.at("columns").get<std::vector<std::string>>();
        for (const auto& jr : j.at("rows")) {
            std::vector<double> row;
            for (const auto& v : jr) row.push_back(parse_double_token(v.get<std::string>()));
            r.rows.push_back(row);
        }
        if (j.contains("slope")) r.slope = j["slope"].get<double>();
        r.checks.clear();
        for (const auto& jc : j.at("checks"))
            r.checks.push_back({jc.at("name").get<std::string>(), jc.at("value").get<double>(),
                                jc.at("cmp").get<std::string>(),
                                jc.at("threshold").get<double>(), jc.at("pass").get<bool>()});
        r.passed = j.at("passed").get<bool>();
        r.config_echo = j.at("config_echo").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.version = j.at("version").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("read_report: missing or mistyped field: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Plot-ready CSV bodies (deterministic; no timestamps).
// ---------------------------------------------------------------------------

inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << kTrajectoryCsvHeader << "\n";
    const Grid& g = traj.config.grid;
    for (size_t k = 0; k < traj.states.size(); ++k) {
        for (int n = g.lattice_min(); n <= g.lattice_max(); ++n) {
            const cplx c = traj.states[k].coeff(n);
            os << fmt_double(traj.times[k]) << ',' << n << ',' << fmt_double(c.real()) << ','
               << fmt_double(c.imag()) << "\n";
        }
    }
    return os.str();
}

struct DiagnosticRow {
    double t;
    std::string metric;
    double value;
};

inline std::string diagnostics_csv(const std::vector<DiagnosticRow>& rows) {
    std::ostringstream os;
    os << kDiagnosticsCsvHeader << "\n";
    for (const auto& r : rows)
        os << fmt_double(r.t) << ',' << r.metric << ',' << fmt_double(r.value) << "\n";
    return os.str();
}

/// param,error,slope_window; the window column holds the pairwise log-log
/// slope against the previous row (empty on the first row and wherever a
/// slope is undefined, e.g. the infinite-depth sentinel).
inline std::string report_csv(const ExperimentReport& r) {
    std::ostringstream os;
    os << kReportCsvHeader << "\n";
    for (size_t i = 0; i < r.rows.size(); ++i) {
        const double p = r.rows[i][0];
        const double e = r.rows[i][1];
        os << fmt_double(p) << ',' << fmt_double(e) << ',';
        if (i > 0) {
            const double p0 = r.rows[i - 1][0], e0 = r.rows[i - 1][1];
            if (std::isfinite(p) && std::isfinite(p0) && p > 0 && p0 > 0 && e > 0 && e0 > 0)
                os << fmt_double(std::log(e / e0) / std::log(p / p0));
        }
        os << "\n";
    }
    return os.str();
}

inline std::string verdict_line(const ExperimentReport& r) {
    return r.passed ? "pass\n" : "fail\n";
}

} // namespace ilwlab
