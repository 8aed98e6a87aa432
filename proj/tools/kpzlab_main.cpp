// kpzlab: seeded growth-model / polymer experiments from TOML or JSON configs.
// Exit codes: 0 all verdicts pass, 1 any verdict fails, 2 usage/config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <kpzlab/kpzlab.hpp>

namespace fs = std::filesystem;
using namespace kpzlab;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool has_seed = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "config file (TOML or JSON)");
    if (config_required) c->required();
    cmd->add_option("--seed", opts.seed_override, "override master_seed")
        ->each([&opts](const std::string&) { opts.has_seed = true; });
    cmd->add_option("--out", opts.out_override, "override output directory");
}

ExperimentConfig load_config(const CommonOpts& opts) {
    ExperimentConfig cfg = ExperimentConfig::load(opts.config_path);
    if (opts.has_seed) cfg.master_seed = opts.seed_override;
    if (!opts.out_override.empty()) cfg.outdir = opts.out_override;
    cfg.validate();
    return cfg;
}

void write_text(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + p.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

// slab guard for the full-grid dump commands
void check_slab(long long T, long long x_max) {
    const double cells = (static_cast<double>(T) + 1.0) * (static_cast<double>(x_max) + 1.0);
    if (cells > 4e6) {
        std::ostringstream o;
        o << "full-grid dump needs " << cells << " cells (~" << cells * 8.0
          << " bytes per field); shrink N, b, or T";
        throw std::invalid_argument(o.str());
    }
}

// ------------------------------------------------------------------ kernels

int cmd_kernels(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    cfg.kind = ExperimentKind::kernels;
    const ExperimentReport rep = run_and_write(cfg);

    const long long T = std::clamp<long long>(cfg.params.t_window(), 64, 4096);
    PowerSumTable tab(T);
    {
        CsvWriter csv((fs::path(cfg.outdir) / "kernels.csv").string(),
                      {"t", "S2", "S4", "S2_t15"});
        for (long long t = 0; t <= T; ++t) {
            const auto u = static_cast<std::size_t>(t);
            csv.row({t, tab.s2[u], tab.s4[u],
                     tab.s2[u] * std::pow(static_cast<double>(t), 1.5)});
        }
    }

    // local-time bound table on the configured points, or a default subsample
    std::vector<long long> xs, ts;
    if (cfg.points.empty()) {
        const long long xw = cfg.params.x_window(), tw = cfg.params.t_window();
        for (long long x = 0; x <= xw; x += std::max<long long>(1, xw / 8)) xs.push_back(x);
        for (long long t = 0; t <= tw; t += std::max<long long>(1, tw / 8)) ts.push_back(t);
    } else {
        for (const auto& [x, t] : cfg.points) {
            xs.push_back(static_cast<long long>(std::llround(x * cfg.params.sqrtN())));
            ts.push_back(
                static_cast<long long>(std::llround(t * static_cast<double>(cfg.params.N))));
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    }
    const LocalTimeScan scan = local_time_bound_scan(cfg.params, xs, ts);
    {
        CsvWriter csv((fs::path(cfg.outdir) / "local_time.csv").string(),
                      {"N", "A", "x", "t", "dp_value", "jensen_lb", "cs_ub"});
        for (std::size_t it = 0; it < scan.ts.size(); ++it)
            for (std::size_t ix = 0; ix < scan.xs.size(); ++ix) {
                const BoundChainCell& cell = scan.at(ix, it);
                csv.row({cfg.params.N, cfg.params.A, cell.x, cell.t, cell.value, cell.jensen,
                         cell.cs});
            }
    }
    std::cout << summarize_text(rep);
    return rep.all_pass() ? 0 : 1;
}

// ----------------------------------------------------------------- simulate

int cmd_simulate(const std::string& psi, const std::string& noise_name, double noise_param,
                 long long N, double A, double beta, long long T, std::uint64_t seed,
                 const std::string& out_csv, const std::string& pairing,
                 const std::string& lambda) {
    const ModelParams params(N, beta, A);
    const NoiseSpec spec = NoiseSpec::parse(noise_name, noise_param);
    GrowthFunction gf = GrowthFunction::polymer(beta);
    if (psi == "quadratic")
        gf = GrowthFunction::quadratic(pairing == "literal" ? beta : 0.25 * beta);
    else if (psi != "polymer")
        throw std::invalid_argument("simulate: psi must be polymer or quadratic");

    const long long x_eval = params.x_window();
    check_slab(T, x_eval + T);
    const NoiseField noise(spec, seed);
    const InterfaceField f =
        evolve_interface(gf, noise, params, initial_profile(lambda, params), T, x_eval);

    CsvWriter csv(out_csv, {"x", "t", "f_raw", "f_tilted"});
    const long long t_stop = f.finite ? T : std::max<long long>(0, f.bad_t - 1);
    for (long long t = 0; t <= t_stop; ++t)
        for (long long x = 0; x <= x_eval; ++x)
            csv.row({x, t, f.f_raw(x, t), f.f_tilted(x, t)});
    if (!f.finite)
        std::cerr << "simulate: field went non-finite at t=" << f.bad_t
                  << "; dump truncated\n";
    return f.finite ? 0 : 1;
}

// ------------------------------------------------------------------ polymer

int cmd_polymer(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    const long long T = cfg.params.t_window();
    const long long x_eval = cfg.params.x_window();
    check_slab(T, x_eval + T + 1);
    fs::create_directories(cfg.outdir);

    const GrowthFunction gf = cfg.growth();
    const double c = compute_c(gf);
    const VResult vres = compute_v(cfg.noise, gf, 256);
    const auto Lambda = initial_profile(cfg.lambda, cfg.params);
    const NoiseField noise(cfg.noise, cfg.master_seed);

    const PartitionField Z = evolve_partition(noise, cfg.params, Lambda, T, x_eval);
    {
        CsvWriter csv((fs::path(cfg.outdir) / "partition.csv").string(),
                      {"x", "t", "Z", "f_poly"});
        const long long t_stop = (Z.finite && Z.positive) ? T : std::max<long long>(0, Z.bad_t - 1);
        for (long long t = 0; t <= t_stop; ++t)
            for (long long x = 0; x <= x_eval; ++x)
                csv.row({x, t, Z.Z(x, t), Z.f_poly(x, t)});
    }

    const ChaosTables tabs = chaos_tables(noise, cfg.params, c, T, x_eval);
    const InterfaceField f = evolve_interface(gf, noise, cfg.params, Lambda, T, x_eval);
    {
        CsvWriter csv((fs::path(cfg.outdir) / "renorm_fields.csv").string(),
                      {"x", "t", "K", "Y", "delta"});
        for (long long t = 0; t <= T; ++t)
            for (long long x = 0; x <= x_eval; ++x) {
                const double delta = (Z.finite && Z.positive && f.finite)
                                         ? f.f_tilted(x, t) - Z.f_poly(x, t) - tabs.Y(x, t)
                                         : std::numeric_limits<double>::quiet_NaN();
                csv.row({x, t, tabs.K(x, t), tabs.Y(x, t), delta});
            }
    }

    nlohmann::json j;
    j["c"] = c;
    j["V"] = vres.V;
    j["truncation"] = vres.V_truncated;
    j["tail_bound"] = vres.tail_bound;
    j["horizon"] = vres.T;
    j["config_hash"] = cfg.hash();
    j["master_seed"] = cfg.master_seed;
    write_text(fs::path(cfg.outdir) / "constants.json", j.dump(2) + "\n");

    const bool ok = Z.finite && Z.positive && f.finite;
    if (!ok) std::cerr << "polymer: field degenerated; dumps truncated\n";
    return ok ? 0 : 1;
}

// ------------------------------------------------------- config-driven kinds

int cmd_report(const CommonOpts& opts, ExperimentKind forced, bool force_kind) {
    ExperimentConfig cfg = load_config(opts);
    if (force_kind) cfg.kind = forced;
    const ExperimentReport rep = run_and_write(cfg);
    std::cout << summarize_text(rep);
    return rep.all_pass() ? 0 : 1;
}

// ---------------------------------------------------------------------- she

int cmd_she(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    cfg.kind = ExperimentKind::she_compare;
    const ExperimentReport rep = run_and_write(cfg);

    // one seeded field dump alongside the replicate report
    std::function<double(double)> z0;
    if (cfg.lambda == "flat") z0 = [](double) { return 1.0; };
    else z0 = [](double x) {
        return std::clamp(std::exp(std::sin(std::sqrt(std::max(0.0, x)))), 0.25, 4.0);
    };
    std::vector<double> snaps;
    for (const auto& [x, t] : cfg.points) snaps.push_back(t);
    snaps.push_back(cfg.she.t_len);
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

    const SheField field = she_euler_sample(cfg.params.A, cfg.params.beta, cfg.noise.moment(2),
                                            z0, cfg.she, cfg.master_seed, snaps);
    {
        CsvWriter csv((fs::path(cfg.outdir) / "she_field.csv").string(), {"x", "t", "Z_sample"});
        for (std::size_t k = 0; k < field.snapshots.size(); ++k)
            for (long long i = 0; i < field.nx; ++i)
                csv.row({i * cfg.she.dx, field.snapshot_times[k],
                         field.snapshots[k][static_cast<std::size_t>(i)]});
    }
    nlohmann::json j;
    j["grid"] = {{"dx", cfg.she.dx}, {"dt", cfg.she.dt}, {"x_len", cfg.she.x_len},
                 {"t_len", cfg.she.t_len}};
    j["seed"] = cfg.master_seed;
    j["moments"] = {{"mu2", cfg.noise.moment(2)}, {"mu4", cfg.noise.moment(4)}};
    j["negative_cells"] = field.negative_cells;
    j["finite"] = field.finite;
    write_text(fs::path(cfg.outdir) / "she_summary.json", j.dump(2) + "\n");

    std::cout << summarize_text(rep);
    return rep.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"half-space growth model / polymer laboratory"};
    app.require_subcommand(1);

    CommonOpts kernels_opts, polymer_opts, renorm_opts, compare_opts, she_opts;

    auto* kernels_cmd = app.add_subcommand("kernels", "power-sum and local-time bound tables");
    add_common(kernels_cmd, kernels_opts);

    // simulate takes direct flags instead of a config file
    std::string sim_psi = "polymer", sim_noise = "rademacher", sim_pairing = "effective",
                sim_lambda = "flat", sim_out = "simulate.csv";
    double sim_param = 1.0, sim_A = 0.0, sim_beta = 1.0;
    long long sim_N = 1024, sim_T = 256;
    std::uint64_t sim_seed = 1;
    auto* sim_cmd = app.add_subcommand("simulate", "evolve one interface and dump f");
    sim_cmd->add_option("--psi", sim_psi, "growth family: polymer | quadratic");
    sim_cmd->add_option("--noise", sim_noise, "noise family");
    sim_cmd->add_option("--noise-param", sim_param, "noise family parameter");
    sim_cmd->add_option("--N", sim_N, "lattice scale N");
    sim_cmd->add_option("--A", sim_A, "boundary constant A");
    sim_cmd->add_option("--beta", sim_beta, "inverse temperature");
    sim_cmd->add_option("--T", sim_T, "number of time steps");
    sim_cmd->add_option("--seed", sim_seed, "noise seed");
    sim_cmd->add_option("--pairing", sim_pairing, "quadratic curvature: effective | literal");
    sim_cmd->add_option("--lambda", sim_lambda, "initial profile: flat | holder");
    sim_cmd->add_option("--out", sim_out, "output CSV path");

    auto* polymer_cmd = app.add_subcommand("polymer", "partition/renormalization field dumps");
    add_common(polymer_cmd, polymer_opts);

    auto* renorm_cmd = app.add_subcommand("renorm", "replicate mean of Y against V t");
    add_common(renorm_cmd, renorm_opts);

    auto* compare_cmd =
        app.add_subcommand("compare", "distributional / envelope experiments from config");
    add_common(compare_cmd, compare_opts);

    auto* she_cmd = app.add_subcommand("she", "stochastic heat equation sampling and checks");
    add_common(she_cmd, she_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (kernels_cmd->parsed()) return cmd_kernels(kernels_opts);
        if (sim_cmd->parsed())
            return cmd_simulate(sim_psi, sim_noise, sim_param, sim_N, sim_A, sim_beta, sim_T,
                                sim_seed, sim_out, sim_pairing, sim_lambda);
        if (polymer_cmd->parsed()) return cmd_polymer(polymer_opts);
        if (renorm_cmd->parsed())
            return cmd_report(renorm_opts, ExperimentKind::renorm_mean, true);
        if (compare_cmd->parsed()) {
            ExperimentConfig probe = load_config(compare_opts);
            if (probe.kind != ExperimentKind::invariance &&
                probe.kind != ExperimentKind::bound_scan &&
                probe.kind != ExperimentKind::local_time_scan)
                throw std::invalid_argument(
                    "compare: config kind must be invariance, bound_scan, or local_time_scan");
            return cmd_report(compare_opts, probe.kind, false);
        }
        if (she_cmd->parsed()) return cmd_she(she_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << "usage error: no subcommand\n";
    return 2;
}
