// nspolar command-line interface: constructs codes, characterizes simulated
// crossbar arrays and runs the Monte Carlo experiments. Every run writes a
// CSV plus a manifest with the canonical config and its hash; reruns with the
// same config and seed reproduce results bit for bit.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "nspolar/experiments.hpp"
#include "nspolar/rng.hpp"

namespace {

using nspolar::ExperimentConfig;

struct CliState {
    ExperimentConfig cfg;
    std::string config_path;
    std::string characterization_path;
    std::string spec_out = "code_spec.json";
    double p_center = 0.08;
    double rw = 25.0;
    bool rw_given = false;
};

void add_common_options(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "JSON config file (CLI flags override it)");
    cmd->add_option("--seed", st.cfg.seed, "master RNG seed (mandatory)")
        ->each([&st](const std::string&) { st.cfg.seed_set = true; });
    cmd->add_option("--out", st.cfg.out, "output CSV path");
    cmd->add_option("--n", st.cfg.n, "log2 blocklength (synthetic experiments)");
    cmd->add_option("--rate", st.cfg.rate, "code rate; k = floor(rate*N)");
    cmd->add_option("--dimension", st.cfg.dimension_override, "explicit k (overrides rate)");
    cmd->add_option("--perm", st.cfg.perm,
                    "identity|bitreversal|ordered|ordered_bitreversal|random");
    cmd->add_option("--np", st.cfg.n_punctured, "punctured positions (QUP)");
    cmd->add_option("--ordering-metric", st.cfg.ordering_metric, "capacity|bhattacharyya");
    cmd->add_option("--check-node", st.cfg.check_node, "tanh|minsum decoder check-node rule");
    cmd->add_option("--llr-saturation", st.cfg.llr_saturation, "finite LLR for noiseless reads");
    cmd->add_option("--p-centers", st.cfg.p_centers, "BSC sweep centers (synthetic-bsc)");
    cmd->add_option("--p-max-deviation", st.cfg.p_max_deviation, "linear spread around center");
    cmd->add_option("--random-perms", st.cfg.random_perms, "random permutations to average");
    cmd->add_option("--encoding", st.cfg.encoding, "both|systematic");
    cmd->add_option("--frames", st.cfg.frames, "Monte Carlo frames per point");
    cmd->add_option("--adaptive-frames", st.cfg.adaptive_frames,
                    "extend frames until min bit errors or the cap");
    cmd->add_option("--min-bit-errors", st.cfg.min_bit_errors, "bit-error target per point");
    cmd->add_option("--max-frames", st.cfg.max_frames, "frame cap per point");
    cmd->add_option("--rows", st.cfg.array_rows, "crossbar rows");
    cmd->add_option("--cols", st.cfg.array_cols, "crossbar cols");
    cmd->add_option("--rw-sweep", st.cfg.rw_sweep, "wire resistances to sweep (ohms)");
    cmd->add_option("--r-lrs", st.cfg.r_lrs, "low resistance state (ohms)");
    cmd->add_option("--r-hrs", st.cfg.r_hrs, "high resistance state (ohms)");
    cmd->add_option("--vread", st.cfg.read_voltage, "read voltage (volts)");
    cmd->add_option("--solver-tol", st.cfg.solver_rel_tol, "solver relative residual tolerance");
    cmd->add_option("--training-trials", st.cfg.training_trials, "characterization reads");
    cmd->add_option("--holdout-trials", st.cfg.holdout_trials, "holdout reads");
    cmd->add_option("--mode", st.cfg.mode, "bsc|bac cell model");
    cmd->add_option("--np-grid", st.cfg.np_grid, "puncture sweep grid");
    cmd->add_option("--permclass-trials", st.cfg.permclass_trials,
                    "random quadruples for the permutation-class checks");
}

int run_experiment(CliState& st, const std::string& kind) {
    st.cfg.kind = kind;
    st.cfg.validate();
    std::vector<nspolar::ResultRow> rows;
    if (kind == "synthetic-bsc")
        rows = nspolar::run_synthetic_bsc(st.cfg);
    else if (kind == "crossbar-ber")
        rows = nspolar::run_crossbar_ber(st.cfg);
    else if (kind == "bsc-vs-bac")
        rows = nspolar::run_bsc_vs_bac(st.cfg);
    else if (kind == "puncture-sweep")
        rows = nspolar::run_puncture_sweep(st.cfg);
    nspolar::save_results(st.cfg, rows);
    std::cout << rows.size() << " result rows -> " << st.cfg.out << '\n';
    return 0;
}

int run_permclass_cmd(CliState& st) {
    st.cfg.kind = "permclass";
    st.cfg.validate();
    const nspolar::PermclassReport report = nspolar::run_permclass(st.cfg);
    std::cout << report.text;
    nspolar::save_results(st.cfg, report.rows);
    return report.passed ? 0 : 1;
}

int run_characterize(CliState& st) {
    st.cfg.kind = "characterize";
    st.cfg.validate();
    const double rw = st.rw_given ? st.rw : st.cfg.resolved_rw_sweep().front();
    const auto ccfg = st.cfg.crossbar_config(rw);
    const auto bundle =
        nspolar::characterize_crossbar(ccfg, st.cfg.training_trials, st.cfg.seed);
    const auto& chars = st.cfg.mode == "bsc" ? bundle.bsc : bundle.bac;
    nspolar::save_characterization(chars, st.cfg.out);
    std::cout << "characterization (" << st.cfg.mode << ", rw=" << rw << ") -> " << st.cfg.out
              << '\n';
    return 0;
}

int run_construct(CliState& st) {
    st.cfg.kind = "construct";
    st.cfg.validate();

    std::vector<nspolar::ChannelModel> channels;
    if (!st.characterization_path.empty()) {
        const auto chars = nspolar::load_characterization(st.characterization_path);
        channels = chars.cells;
    } else {
        const size_t n = size_t{1} << st.cfg.n;
        for (double p :
             nspolar::synthetic_p_profile(n, st.p_center, st.cfg.p_max_deviation))
            channels.push_back(nspolar::ChannelModel::bsc(p));
    }

    nspolar::BuildOptions opts;
    opts.perm_kind = st.cfg.perm_kind();
    opts.n_punctured = st.cfg.n_punctured;
    opts.ordering_metric = st.cfg.ordering();
    opts.random_perm_seed = nspolar::stream_seed(st.cfg.seed, "perm", 0, 0);
    const auto spec =
        nspolar::build_code(channels, st.cfg.dimension(channels.size()), opts);
    nspolar::save_code_spec(spec, st.spec_out);
    std::cout << "code spec (N=" << spec.block_length << ", k=" << spec.dimension
              << ", perm=" << st.cfg.perm << ", np=" << st.cfg.n_punctured << ") -> "
              << st.spec_out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-stationary polar codes over simulated resistive crossbars"};
    app.require_subcommand(1);

    CliState st;
    int rc = 0;

    // Config file loads first so that explicit flags override its values.
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        std::string path;
        if (arg == "--config" && i + 1 < argc)
            path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0)
            path = arg.substr(9);
        if (!path.empty()) {
            try {
                st.cfg = ExperimentConfig::from_json_file(path);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << '\n';
                return 2;
            }
        }
    }

    auto* sbsc = app.add_subcommand("synthetic-bsc", "BSC profile sweep with permutations");
    auto* cber = app.add_subcommand("crossbar-ber", "crossbar pipeline permutation comparison");
    auto* bvb = app.add_subcommand("bsc-vs-bac", "BSC vs BAC cell modeling comparison");
    auto* psweep = app.add_subcommand("puncture-sweep", "QUP puncture sweep with biased training");
    auto* pclass = app.add_subcommand("permclass", "permutation class counts and optimality checks");
    auto* charc = app.add_subcommand("characterize", "train and save a cell characterization");
    auto* constr = app.add_subcommand("construct", "build and save a code spec");

    for (auto* cmd : {sbsc, cber, bvb, psweep, pclass, charc, constr}) add_common_options(cmd, st);
    charc->add_option("--rw", st.rw, "wire resistance (ohms)")
        ->each([&st](const std::string&) { st.rw_given = true; });
    constr->add_option("--characterization", st.characterization_path,
                       "characterization file providing the per-cell channels");
    constr->add_option("--p-center", st.p_center, "synthetic BSC profile center");
    constr->add_option("--spec-out", st.spec_out, "output code spec path");

    sbsc->callback([&]() { rc = run_experiment(st, "synthetic-bsc"); });
    cber->callback([&]() { rc = run_experiment(st, "crossbar-ber"); });
    bvb->callback([&]() { rc = run_experiment(st, "bsc-vs-bac"); });
    psweep->callback([&]() { rc = run_experiment(st, "puncture-sweep"); });
    pclass->callback([&]() { rc = run_permclass_cmd(st); });
    charc->callback([&]() { rc = run_characterize(st); });
    constr->callback([&]() { rc = run_construct(st); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return rc;
}
