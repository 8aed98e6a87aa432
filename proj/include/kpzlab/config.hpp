#pragma once
// Experiment configuration.  One struct, two wire formats: a small TOML
// subset (sections, scalars, one nested point array) and JSON via the
// vendored nlohmann header.  Both emitters print doubles with %.17g so a
// config survives any number of round trips bit-for-bit.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "growth.hpp"
#include "noise.hpp"
#include "she.hpp"

namespace kpzlab {

enum class ExperimentKind { kernels, invariance, local_time_scan, renorm_mean, bound_scan, she_compare };

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::kernels: return "kernels";
        case ExperimentKind::invariance: return "invariance";
        case ExperimentKind::local_time_scan: return "local_time_scan";
        case ExperimentKind::renorm_mean: return "renorm_mean";
        case ExperimentKind::bound_scan: return "bound_scan";
        case ExperimentKind::she_compare: return "she_compare";
    }
    return "?";
}

inline ExperimentKind parse_kind(const std::string& s) {
    for (ExperimentKind k : {ExperimentKind::kernels, ExperimentKind::invariance,
                             ExperimentKind::local_time_scan, ExperimentKind::renorm_mean,
                             ExperimentKind::bound_scan, ExperimentKind::she_compare})
        if (s == kind_name(k)) return k;
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Flat "section.key" -> raw token map for the TOML subset: # comments,
// [section] headers, key = value with value a quoted string, number,
// boolean, or a single-line (possibly nested) array.
struct TomlDoc {
    std::map<std::string, std::string> kv;

    static TomlDoc parse(const std::string& text) {
        TomlDoc doc;
        std::string cur;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            // strip comments (the subset has no '#' inside strings we emit,
            // but respect quotes anyway)
            bool quoted = false;
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (line[i] == '"') quoted = !quoted;
                else if (line[i] == '#' && !quoted) { line.erase(i); break; }
            }
            const auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                if (b == std::string::npos) return std::string();
                const auto e = s.find_last_not_of(" \t\r");
                return s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']' && line[1] != '[') {
                cur = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty() || val.empty())
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": empty key or value");
            doc.kv[cur.empty() ? key : cur + "." + key] = val;
        }
        return doc;
    }

    bool has(const std::string& k) const { return kv.count(k) != 0; }

    const std::string& raw(const std::string& k) const {
        const auto it = kv.find(k);
        if (it == kv.end()) throw std::invalid_argument("config: missing key '" + k + "'");
        return it->second;
    }

    std::string str(const std::string& k) const {
        const std::string& v = raw(k);
        if (v.size() < 2 || v.front() != '"' || v.back() != '"')
            throw std::invalid_argument("config: key '" + k + "' must be a quoted string");
        return v.substr(1, v.size() - 2);
    }

    double f64(const std::string& k) const {
        std::size_t used = 0;
        const double v = std::stod(raw(k), &used);
        if (used != raw(k).size())
            throw std::invalid_argument("config: key '" + k + "' is not a number");
        return v;
    }

    long long i64(const std::string& k) const {
        std::size_t used = 0;
        const long long v = std::stoll(raw(k), &used);
        if (used != raw(k).size())
            throw std::invalid_argument("config: key '" + k + "' is not an integer");
        return v;
    }

    std::uint64_t u64(const std::string& k) const {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(raw(k), &used);
        if (used != raw(k).size())
            throw std::invalid_argument("config: key '" + k + "' is not an integer");
        return v;
    }

    bool boolean(const std::string& k) const {
        const std::string& v = raw(k);
        if (v == "true") return true;
        if (v == "false") return false;
        throw std::invalid_argument("config: key '" + k + "' must be true or false");
    }

    // [[x1, t1], [x2, t2], ...] — scrape the numbers and pair them up.
    std::vector<std::pair<double, double>> points(const std::string& k) const {
        const std::string& v = raw(k);
        std::vector<double> nums;
        int depth = 0;
        std::size_t i = 0;
        while (i < v.size()) {
            const char c = v[i];
            if (c == '[') { ++depth; ++i; }
            else if (c == ']') { --depth; ++i; }
            else if (c == ',' || std::isspace(static_cast<unsigned char>(c))) { ++i; }
            else {
                std::size_t used = 0;
                nums.push_back(std::stod(v.substr(i), &used));
                if (used == 0) throw std::invalid_argument("config: bad array in '" + k + "'");
                i += used;
            }
            if (depth < 0) throw std::invalid_argument("config: unbalanced array in '" + k + "'");
        }
        if (depth != 0 || nums.size() % 2 != 0)
            throw std::invalid_argument("config: '" + k + "' must be a list of [x, t] pairs");
        std::vector<std::pair<double, double>> out;
        for (std::size_t j = 0; j + 1 < nums.size(); j += 2)
            out.emplace_back(nums[j], nums[j + 1]);
        return out;
    }
};

} // namespace detail

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::kernels;
    ModelParams params;
    NoiseSpec noise;
    std::string psi = "polymer";       // growth family: polymer | quadratic
    std::string pairing = "effective"; // quadratic curvature from beta: beta/4 (effective) or beta (literal)
    std::string lambda = "flat";       // initial profile name
    long long replicates = 1;
    std::uint64_t master_seed = 1;
    std::vector<std::pair<double, double>> points; // rescaled (x, t), in (0,a] x [0,b]
    std::string outdir = "out";
    bool shared_noise = false; // drive both models in a comparison from one stream
    bool fresh_seeds = false;  // exploration mode: reseed from the clock, reproducibility off
    SheGrid she;

    void validate() const {
        params.validate();
        noise.validate();
        if (replicates < 1)
            throw std::invalid_argument("ExperimentConfig: replicates must be >= 1");
        if (psi != "polymer" && psi != "quadratic")
            throw std::invalid_argument("ExperimentConfig: psi must be polymer or quadratic");
        if (pairing != "effective" && pairing != "literal")
            throw std::invalid_argument("ExperimentConfig: pairing must be effective or literal");
        if (lambda != "flat" && lambda != "holder")
            throw std::invalid_argument("ExperimentConfig: unknown initial profile '" + lambda + "'");
        for (const auto& [x, t] : points)
            if (!(x > 0.0) || x > params.a || t < 0.0 || t > params.b)
                throw std::invalid_argument(
                    "ExperimentConfig: evaluation points must lie in (0,a] x [0,b]");
    }

    // Resolve the growth-function family against the pairing convention.
    GrowthFunction growth() const {
        if (psi == "polymer") return GrowthFunction::polymer(params.beta);
        const double kappa = (pairing == "literal") ? params.beta : 0.25 * params.beta;
        return GrowthFunction::quadratic(kappa);
    }

    std::string to_toml() const {
        std::ostringstream o;
        using detail::fmt17;
        o << "kind = \"" << kind_name(kind) << "\"\n";
        o << "psi = \"" << psi << "\"\n";
        o << "pairing = \"" << pairing << "\"\n";
        o << "lambda = \"" << lambda << "\"\n";
        o << "replicates = " << replicates << "\n";
        o << "master_seed = " << master_seed << "\n";
        o << "outdir = \"" << outdir << "\"\n";
        o << "shared_noise = " << (shared_noise ? "true" : "false") << "\n";
        o << "fresh_seeds = " << (fresh_seeds ? "true" : "false") << "\n";
        o << "points = [";
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (i) o << ", ";
            o << "[" << fmt17(points[i].first) << ", " << fmt17(points[i].second) << "]";
        }
        o << "]\n\n[model]\n";
        o << "N = " << params.N << "\n";
        o << "beta = " << fmt17(params.beta) << "\n";
        o << "A = " << fmt17(params.A) << "\n";
        o << "a = " << fmt17(params.a) << "\n";
        o << "b = " << fmt17(params.b) << "\n";
        o << "\n[noise]\n";
        o << "family = \"" << family_name(noise.family) << "\"\n";
        o << "param = " << fmt17(noise.param) << "\n";
        o << "\n[she]\n";
        o << "dx = " << fmt17(she.dx) << "\n";
        o << "dt = " << fmt17(she.dt) << "\n";
        o << "x_len = " << fmt17(she.x_len) << "\n";
        o << "t_len = " << fmt17(she.t_len) << "\n";
        return o.str();
    }

    static ExperimentConfig from_toml(const std::string& text) {
        const auto doc = detail::TomlDoc::parse(text);
        ExperimentConfig c;
        c.kind = parse_kind(doc.str("kind"));
        if (doc.has("psi")) c.psi = doc.str("psi");
        if (doc.has("pairing")) c.pairing = doc.str("pairing");
        if (doc.has("lambda")) c.lambda = doc.str("lambda");
        if (doc.has("replicates")) c.replicates = doc.i64("replicates");
        if (doc.has("master_seed")) c.master_seed = doc.u64("master_seed");
        if (doc.has("outdir")) c.outdir = doc.str("outdir");
        if (doc.has("shared_noise")) c.shared_noise = doc.boolean("shared_noise");
        if (doc.has("fresh_seeds")) c.fresh_seeds = doc.boolean("fresh_seeds");
        if (doc.has("points")) c.points = doc.points("points");
        if (doc.has("model.N")) c.params.N = doc.i64("model.N");
        if (doc.has("model.beta")) c.params.beta = doc.f64("model.beta");
        if (doc.has("model.A")) c.params.A = doc.f64("model.A");
        if (doc.has("model.a")) c.params.a = doc.f64("model.a");
        if (doc.has("model.b")) c.params.b = doc.f64("model.b");
        if (doc.has("noise.family"))
            c.noise = NoiseSpec::parse(doc.str("noise.family"),
                                       doc.has("noise.param") ? doc.f64("noise.param") : 1.0);
        if (doc.has("she.dx")) c.she.dx = doc.f64("she.dx");
        if (doc.has("she.dt")) c.she.dt = doc.f64("she.dt");
        if (doc.has("she.x_len")) c.she.x_len = doc.f64("she.x_len");
        if (doc.has("she.t_len")) c.she.t_len = doc.f64("she.t_len");
        c.validate();
        return c;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["kind"] = kind_name(kind);
        j["psi"] = psi;
        j["pairing"] = pairing;
        j["lambda"] = lambda;
        j["replicates"] = replicates;
        j["master_seed"] = master_seed;
        j["outdir"] = outdir;
        j["shared_noise"] = shared_noise;
        j["fresh_seeds"] = fresh_seeds;
        j["points"] = nlohmann::json::array();
        for (const auto& [x, t] : points) j["points"].push_back({x, t});
        j["model"] = {{"N", params.N}, {"beta", params.beta}, {"A", params.A},
                      {"a", params.a}, {"b", params.b}};
        j["noise"] = {{"family", family_name(noise.family)}, {"param", noise.param}};
        j["she"] = {{"dx", she.dx}, {"dt", she.dt}, {"x_len", she.x_len}, {"t_len", she.t_len}};
        return j;
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        c.kind = parse_kind(j.at("kind").get<std::string>());
        c.psi = j.value("psi", c.psi);
        c.pairing = j.value("pairing", c.pairing);
        c.lambda = j.value("lambda", c.lambda);
        c.replicates = j.value("replicates", c.replicates);
        c.master_seed = j.value("master_seed", c.master_seed);
        c.outdir = j.value("outdir", c.outdir);
        c.shared_noise = j.value("shared_noise", c.shared_noise);
        c.fresh_seeds = j.value("fresh_seeds", c.fresh_seeds);
        if (j.contains("points"))
            for (const auto& p : j.at("points"))
                c.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        if (j.contains("model")) {
            const auto& m = j.at("model");
            c.params.N = m.value("N", c.params.N);
            c.params.beta = m.value("beta", c.params.beta);
            c.params.A = m.value("A", c.params.A);
            c.params.a = m.value("a", c.params.a);
            c.params.b = m.value("b", c.params.b);
        }
        if (j.contains("noise"))
            c.noise = NoiseSpec::parse(j.at("noise").value("family", "rademacher"),
                                       j.at("noise").value("param", 1.0));
        if (j.contains("she")) {
            const auto& s = j.at("she");
            c.she.dx = s.value("dx", c.she.dx);
            c.she.dt = s.value("dt", c.she.dt);
            c.she.x_len = s.value("x_len", c.she.x_len);
            c.she.t_len = s.value("t_len", c.she.t_len);
        }
        c.validate();
        return c;
    }

    // Accepts either wire format; sniffs JSON by the leading '{'.
    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && text[first] == '{')
            return from_json(nlohmann::json::parse(text));
        return from_toml(text);
    }

    // FNV-1a over the canonical TOML rendering: a stable provenance tag.
    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (const unsigned char c : to_toml()) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }
};

} // namespace kpzlab
