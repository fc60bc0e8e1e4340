#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nildist/flag.hpp"
#include "nildist/matrix.hpp"
#include "nildist/nestdist.hpp"
#include "nildist/verify.hpp"
#include "nildist/version.hpp"

namespace nildist {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/// 17 significant digits: enough to reproduce any double bit for bit.
inline std::string fullPrecision(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace detail

/// Matrix JSON: {"n": n, "rows": [[[re, im], ...], ...]} with full-precision
/// number formatting. Hand-rendered so the digit count is under our control.
inline std::string writeMatrixJson(const CMatrix& a) {
    if (!a.isSquare()) throw IoError("writeMatrixJson: matrix must be square");
    if (!a.isFinite()) throw IoError("writeMatrixJson: non-finite entries");
    const std::size_t n = a.dim();
    std::ostringstream out;
    out << "{\"n\": " << n << ", \"rows\": [";
    for (std::size_t i = 0; i < n; ++i) {
        out << (i == 0 ? "[" : ", [");
        for (std::size_t j = 0; j < n; ++j) {
            const Complex z = a(i, j);
            out << (j == 0 ? "[" : ", [") << detail::fullPrecision(z.real()) << ", "
                << detail::fullPrecision(z.imag()) << "]";
        }
        out << "]";
    }
    out << "]}";
    return out.str();
}

inline CMatrix matrixFromJson(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("rows"))
        throw IoError("matrix JSON: expected object with \"n\" and \"rows\"");
    if (!doc["n"].is_number_integer() || doc["n"].get<long long>() < 1)
        throw IoError("matrix JSON: \"n\" must be a positive integer");
    const std::size_t n = doc["n"].get<std::size_t>();
    const auto& rows = doc["rows"];
    if (!rows.is_array() || rows.size() != n)
        throw IoError("matrix JSON: expected " + std::to_string(n) + " rows, found " +
                      std::to_string(rows.size()));
    CMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.size() != n)
            throw IoError("matrix JSON: row " + std::to_string(i) + " must have " +
                          std::to_string(n) + " entries");
        for (std::size_t j = 0; j < n; ++j) {
            const auto& entry = row[j];
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
                !entry[1].is_number())
                throw IoError("matrix JSON: entry at row " + std::to_string(i) + ", column " +
                              std::to_string(j) + " must be [re, im]");
            a(i, j) = Complex(entry[0].get<double>(), entry[1].get<double>());
        }
    }
    if (!a.isFinite())
        throw IoError("matrix JSON: non-finite entry");
    return a;
}

inline CMatrix readMatrixJson(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("matrix JSON: parse error: ") + e.what());
    }
    return matrixFromJson(doc);
}

inline CMatrix readMatrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("readMatrix: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return readMatrixJson(buf.str());
}

inline void writeMatrix(const std::string& path, const CMatrix& a) {
    std::ofstream out(path);
    if (!out) throw IoError("writeMatrix: cannot open " + path);
    out << writeMatrixJson(a) << "\n";
    if (!out) throw IoError("writeMatrix: write failed for " + path);
}

inline nlohmann::json flagToJson(const PartialFlag& flag) {
    nlohmann::json j = nlohmann::json::parse(writeMatrixJson(flag.basis));
    if (!flag.isComplete()) j["ranks"] = flag.ranks;
    return j;
}

inline PartialFlag flagFromJson(const nlohmann::json& j) {
    PartialFlag flag;
    flag.basis = matrixFromJson(j);
    if (j.contains("ranks")) {
        flag.ranks = j["ranks"].get<std::vector<std::size_t>>();
    } else {
        flag.ranks.resize(flag.basis.dim() + 1);
        for (std::size_t k = 0; k < flag.ranks.size(); ++k) flag.ranks[k] = k;
    }
    validateRanks(flag);
    if (!isUnitary(flag.basis, 1e-8)) throw IoError("flag JSON: basis is not unitary");
    return flag;
}

inline nlohmann::json certifiedUpperBoundToJson(const CertifiedUpperBound& ub) {
    nlohmann::json j;
    j["value"] = ub.value;
    j["residual"] = ub.residual;
    j["nilpotency_defect"] = ub.nilpotencyDefect;
    j["flag"] = flagToJson(ub.flag);
    j["certificate"] = nlohmann::json::parse(writeMatrixJson(ub.certificate));
    return j;
}

inline nlohmann::json boundTableToJson(const BoundTable& b) {
    return nlohmann::json{
        {"n", b.n}, {"m", b.m}, {"macdonald", b.macdonald}, {"cramer", b.cramer},
        {"theorem1", b.theorem1}};
}

inline std::string boundTableCsvHeader() { return "n,m,macdonald,cramer,theorem1"; }

inline std::string boundTableToCsv(const BoundTable& b) {
    std::ostringstream out;
    out << b.n << "," << b.m << "," << detail::fullPrecision(b.macdonald) << ","
        << detail::fullPrecision(b.cramer) << "," << detail::fullPrecision(b.theorem1);
    return out.str();
}

inline nlohmann::json experimentRowToJson(const ExperimentRow& row) {
    return nlohmann::json{{"n", row.n},
                          {"m", row.m},
                          {"lower_bound", row.lowerBound},
                          {"upper_estimate", row.upperEstimate},
                          {"gap", row.gap},
                          {"seed", row.seed},
                          {"wall_time_ms", row.wallTimeMs},
                          {"label", row.label}};
}

inline ExperimentRow experimentRowFromJson(const nlohmann::json& j) {
    ExperimentRow row;
    row.n = j.at("n").get<std::size_t>();
    row.m = j.at("m").get<std::size_t>();
    row.lowerBound = j.at("lower_bound").get<double>();
    row.upperEstimate = j.at("upper_estimate").get<double>();
    row.gap = j.at("gap").get<double>();
    row.seed = j.at("seed").get<std::uint64_t>();
    row.wallTimeMs = j.at("wall_time_ms").get<double>();
    row.label = j.at("label").get<std::string>();
    return row;
}

inline std::string experimentRowCsvHeader() {
    return "n,m,lower_bound,upper_estimate,gap,seed,wall_time_ms,label";
}

inline std::string experimentRowToCsv(const ExperimentRow& row) {
    std::ostringstream out;
    out << row.n << "," << row.m << "," << detail::fullPrecision(row.lowerBound) << ","
        << detail::fullPrecision(row.upperEstimate) << "," << detail::fullPrecision(row.gap)
        << "," << row.seed << "," << detail::fullPrecision(row.wallTimeMs) << "," << row.label;
    return out.str();
}

inline nlohmann::json falsificationToJson(const FalsificationWitness& w) {
    nlohmann::json j;
    j["event"] = "FALSIFICATION";
    j["row"] = experimentRowToJson(w.row);
    j["matrix"] = nlohmann::json::parse(writeMatrixJson(w.matrix));
    j["projection"] = nlohmann::json::parse(writeMatrixJson(w.projection));
    j["flag"] = nlohmann::json::parse(writeMatrixJson(w.flagBasis));
    j["certificate"] = nlohmann::json::parse(writeMatrixJson(w.certificate));
    return j;
}

/// Reproducibility header embedded in every CLI report.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::uint64_t seed = 0;
    std::string versions = kVersion;
    std::string startedAt;
    std::string finishedAt;
    SearchConfig config;
};

inline std::string isoTimestampUtc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline nlohmann::json manifestToJson(const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["argv"] = m.argv;
    j["seed"] = m.seed;
    j["versions"] = m.versions;
    j["started_at"] = m.startedAt;
    j["finished_at"] = m.finishedAt;
    j["defaults"] = nlohmann::json{{"restarts", m.config.restarts},
                                   {"sweeps", m.config.sweeps},
                                   {"angle_grid", m.config.angleGrid},
                                   {"shrink", m.config.shrink},
                                   {"cert_tol", m.config.certTol}};
    return j;
}

}  // namespace nildist
