#pragma once
// Experiment reports: per-point statistics with explicit tolerances and
// verdicts, raw per-replicate samples (so every verdict can be recomputed),
// and provenance (config hash, master seed, code version).

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace kpzlab {

inline constexpr const char* kCodeVersion = "kpzlab 0.1.0";

namespace detail {

// NaN has no JSON literal; represent "not applicable" as null both ways.
inline nlohmann::json jnum(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline double dnum(const nlohmann::json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

} // namespace detail

struct PointStat {
    double x = 0.0, t = 0.0; // rescaled coordinates
    long long n = 0;         // samples entering the statistic
    long long excluded = 0;  // non-finite replicates dropped
    double mean = 0.0;
    double variance = 0.0;
    double ci_half = 0.0; // 1.96 * stderr of the mean
    double statistic = 0.0;
    double p_value = std::numeric_limits<double>::quiet_NaN();
    double tolerance = 0.0;
    bool pass = false;
    std::string note; // states what statistic and tolerance mean here

    nlohmann::json to_json() const {
        using detail::jnum;
        return {{"x", x},           {"t", t},
                {"n", n},           {"excluded", excluded},
                {"mean", jnum(mean)}, {"variance", jnum(variance)},
                {"ci_half", jnum(ci_half)}, {"statistic", jnum(statistic)},
                {"p_value", jnum(p_value)}, {"tolerance", tolerance},
                {"pass", pass},     {"note", note}};
    }

    static PointStat from_json(const nlohmann::json& j) {
        using detail::dnum;
        PointStat s;
        s.x = j.at("x").get<double>();
        s.t = j.at("t").get<double>();
        s.n = j.at("n").get<long long>();
        s.excluded = j.at("excluded").get<long long>();
        s.mean = dnum(j.at("mean"));
        s.variance = dnum(j.at("variance"));
        s.ci_half = dnum(j.at("ci_half"));
        s.statistic = dnum(j.at("statistic"));
        s.p_value = dnum(j.at("p_value"));
        s.tolerance = j.at("tolerance").get<double>();
        s.pass = j.at("pass").get<bool>();
        s.note = j.at("note").get<std::string>();
        return s;
    }
};

struct ExperimentReport {
    std::string kind;
    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;
    std::string code_version = kCodeVersion;
    long long replicates = 0;
    std::vector<PointStat> points;
    // raw values, one vector per point, replicate order; non-finite entries
    // stay in place so exclusions stay auditable
    std::vector<std::vector<double>> samples;

    bool all_pass() const {
        for (const auto& p : points)
            if (!p.pass) return false;
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["kind"] = kind;
        j["config_hash"] = config_hash;
        j["master_seed"] = master_seed;
        j["code_version"] = code_version;
        j["replicates"] = replicates;
        j["points"] = nlohmann::json::array();
        for (const auto& p : points) j["points"].push_back(p.to_json());
        j["samples"] = nlohmann::json::array();
        for (const auto& row : samples) {
            nlohmann::json r = nlohmann::json::array();
            for (const double v : row) r.push_back(detail::jnum(v));
            j["samples"].push_back(std::move(r));
        }
        return j;
    }

    static ExperimentReport from_json(const nlohmann::json& j) {
        ExperimentReport r;
        r.kind = j.at("kind").get<std::string>();
        r.config_hash = j.at("config_hash").get<std::uint64_t>();
        r.master_seed = j.at("master_seed").get<std::uint64_t>();
        r.code_version = j.at("code_version").get<std::string>();
        r.replicates = j.at("replicates").get<long long>();
        for (const auto& p : j.at("points")) r.points.push_back(PointStat::from_json(p));
        for (const auto& row : j.at("samples")) {
            std::vector<double> vals;
            for (const auto& v : row) vals.push_back(detail::dnum(v));
            r.samples.push_back(std::move(vals));
        }
        return r;
    }
};

// Stable column order; one row per (point, replicate) in the sample dump.
inline std::string summarize_csv(const ExperimentReport& r) {
    std::ostringstream o;
    char buf[40];
    const auto f = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    o << "point,x,t,replicate,value\n";
    for (std::size_t i = 0; i < r.samples.size(); ++i)
        for (std::size_t k = 0; k < r.samples[i].size(); ++k)
            o << i << ',' << f(r.points[i].x) << ',' << f(r.points[i].t) << ',' << k << ','
              << f(r.samples[i][k]) << '\n';
    return o.str();
}

inline std::string summarize_json(const ExperimentReport& r) { return r.to_json().dump(2); }

// Verdict table: one line per point plus an overall verdict.
inline std::string summarize_text(const ExperimentReport& r) {
    std::ostringstream o;
    o << "experiment " << r.kind << "  seed " << r.master_seed << "  config "
      << std::hex << r.config_hash << std::dec << "  (" << r.code_version << ")\n";
    o << "replicates " << r.replicates << "\n";
    for (const auto& p : r.points) {
        o << (p.pass ? "  PASS" : "  FAIL") << "  (x=" << p.x << ", t=" << p.t << ")"
          << "  n=" << p.n;
        if (p.excluded) o << " (excluded " << p.excluded << ")";
        o << "  stat=" << p.statistic;
        if (std::isfinite(p.p_value)) o << "  p=" << p.p_value;
        o << "  tol=" << p.tolerance << "  " << p.note << "\n";
    }
    o << (r.all_pass() ? "ALL PASS" : "FAILURES PRESENT") << "\n";
    return o.str();
}

inline std::string summarize_report(const ExperimentReport& r, const std::string& format) {
    if (format == "csv") return summarize_csv(r);
    if (format == "json") return summarize_json(r);
    if (format == "text") return summarize_text(r);
    throw std::invalid_argument("summarize_report: format must be csv, json, or text");
}

} // namespace kpzlab
