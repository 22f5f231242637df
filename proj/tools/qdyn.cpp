// qdyn command-line front end.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qdyn/io.hpp"
#include "qdyn/pipeline.hpp"

namespace fs = std::filesystem;
using namespace qdyn;

namespace {

struct RunOptions {
    std::string target = "cnot";
    std::string noise = "none";
    long shots = 0;
    bool exact = false;
    std::uint64_t seed = 0;
    std::string measures = "alpha_dyn,beta_dyn,alpha_cre,beta_cre,fidelity";
    std::string tp;
    int restarts = 5;
    double seesaw_tol = 1e-6;
    int max_rounds = 100;
    int jobs = 0;
    double sdp_tol = 0.0;
    int sdp_max_iter = 0;
    std::string config;
    std::string out_dir = ".";
};

void add_run_options(CLI::App *sub, RunOptions &o, bool with_bounds) {
    sub->add_option("--target", o.target, "cnot, fusion, identity1, identity2 or a target-v1 JSON file");
    sub->add_option("--noise", o.noise, "noise after the target, e.g. depolarizing:0.1+dephasing:0.05 or none");
    sub->add_option("--shots", o.shots, "runs per input state and setting");
    sub->add_flag("--exact", o.exact, "use Born-rule probabilities instead of sampled counts");
    sub->add_option("--seed", o.seed, "sampling seed (required with --shots)");
    sub->add_option("--measures", o.measures, "comma-separated subset of alpha_dyn,beta_dyn,alpha_cre,beta_cre,fidelity");
    sub->add_option("--tp", o.tp, "override the trace condition: tp or tni");
    sub->add_option("--jobs", o.jobs, "worker threads (default: one per measure)");
    sub->add_option("--sdp-tol", o.sdp_tol, "solver tolerance (also QDYN_SDP_TOL)");
    sub->add_option("--sdp-max-iter", o.sdp_max_iter, "solver iteration cap (also QDYN_SDP_MAX_ITER)");
    sub->add_option("--config", o.config, "JSON file with any of these options; command-line flags win");
    sub->add_option("--out-dir", o.out_dir, "directory for report files");
    if (with_bounds) {
        sub->add_option("--restarts", o.restarts, "see-saw restarts");
        sub->add_option("--seesaw-tol", o.seesaw_tol, "see-saw stopping tolerance");
        sub->add_option("--max-rounds", o.max_rounds, "see-saw round cap");
    }
}

// Fills options that were not given on the command line from the config file.
void apply_config(CLI::App *sub, RunOptions &o) {
    if (o.config.empty()) {
        return;
    }
    const auto j = nlohmann::json::parse(io::read_file(o.config));
    if (!j.is_object()) {
        throw ParameterError("config: expected a JSON object");
    }
    for (const auto &[key, value] : j.items()) {
        const std::string flag = "--" + key;
        CLI::Option *opt = nullptr;
        try {
            opt = sub->get_option(flag);
        } catch (const CLI::OptionNotFound &) {
            throw ParameterError("config: unknown option '" + key + "'");
        }
        if (opt->count() > 0 || key == "config") {
            continue;
        }
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_boolean()) {
            text = value.get<bool>() ? "true" : "false";
        } else if (value.is_array()) {
            for (const auto &v : value) {
                text += (text.empty() ? "" : ",") + v.get<std::string>();
            }
        } else {
            text = value.dump();
        }
        opt->add_result(text);
        opt->run_callback();
    }
}

std::vector<measures::Measure> parse_measures(const std::string &s) {
    std::vector<measures::Measure> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(measures::measure_from_string(item));
        }
    }
    return out;
}

pipeline::RunConfig to_config(CLI::App *sub, const RunOptions &o) {
    pipeline::RunConfig c;
    c.target = o.target;
    c.noise = o.noise;
    c.exact = o.exact || o.shots == 0;
    c.shots = o.shots;
    if (!c.exact && sub->get_option("--seed")->count() == 0) {
        throw ParameterError("--seed is required with --shots");
    }
    c.seed = o.seed;
    c.measures = parse_measures(o.measures);
    if (!o.tp.empty()) {
        c.tp_override = channels::tp_mode_from_string(o.tp);
    }
    sdp::Settings s = sdp::Settings::from_env();
    if (o.sdp_tol > 0) {
        s.tol = o.sdp_tol;
    }
    if (o.sdp_max_iter > 0) {
        s.max_iter = o.sdp_max_iter;
    }
    c.seesaw.sdp = s;
    c.seesaw.restarts = o.restarts;
    c.seesaw.tol = o.seesaw_tol;
    c.seesaw.max_rounds = o.max_rounds;
    c.jobs = o.jobs;
    pipeline::validate(c);
    return c;
}

std::string fmt(double v) {
    if (!std::isfinite(v)) {
        return "-";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void print_table(const io::MeasuresReport &r) {
    std::printf("%-10s %10s %10s %10s %10s %12s\n", "measure", "lower", "upper", "direct", "gap", "solver_iters");
    for (const auto &row : r.rows) {
        std::printf("%-10s %10s %10s %10s %10s %12d\n", measures::to_string(row.measure), fmt(row.lower).c_str(),
                    fmt(row.upper).c_str(), fmt(row.direct).c_str(), fmt(row.upper - row.lower).c_str(),
                    row.iterations);
    }
}

fs::path out_path(const RunOptions &o, const std::string &name) {
    fs::create_directories(o.out_dir);
    return fs::path(o.out_dir) / name;
}

void write_transitions(const aoqpt::TransitionPair &tp, const std::string &prefix) {
    io::write_file(prefix + "_xy.json", io::tmat_to_json(tp.xy));
    io::write_file(prefix + "_uv.json", io::tmat_to_json(tp.uv));
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Process capability bounds from two complementary settings, with a full-tomography oracle"};
    app.require_subcommand(1);

    // plan
    std::string plan_target = "cnot";
    std::string plan_scheme = "aoqpt";
    auto *plan = app.add_subcommand("plan", "print the Pauli settings of a scheme as CSV (count on stderr)");
    plan->add_option("--target", plan_target, "cnot, fusion, identity1, identity2 or a target-v1 JSON file");
    plan->add_option("--scheme", plan_scheme, "sqpt or aoqpt")->check(CLI::IsMember({"sqpt", "aoqpt"}));

    // simulate
    RunOptions sim_opts;
    std::string sim_scheme = "aoqpt";
    std::string sim_out = "data.json";
    auto *simulate = app.add_subcommand("simulate", "simulate Pauli-setting data (sqpt-v1) for a noisy target");
    add_run_options(simulate, sim_opts, false);
    simulate->add_option("--scheme", sim_scheme, "sqpt or aoqpt")->check(CLI::IsMember({"sqpt", "aoqpt"}));
    simulate->add_option("--out", sim_out, "output dataset file");

    // sqpt
    auto *sqpt = app.add_subcommand("sqpt", "standard process tomography");
    sqpt->require_subcommand(1);
    RunOptions sqpt_run_opts;
    std::string sqpt_run_out = "chi.json";
    auto *sqpt_run = sqpt->add_subcommand("run", "simulate all 3^2N settings and reconstruct chi");
    add_run_options(sqpt_run, sqpt_run_opts, false);
    sqpt_run->add_option("--out", sqpt_run_out, "reconstructed chi (chi-v1)");
    std::string rec_data;
    std::string rec_tp = "tp";
    std::string rec_out = "chi.json";
    auto *sqpt_rec = sqpt->add_subcommand("reconstruct", "reconstruct chi from a sqpt-v1 dataset");
    sqpt_rec->add_option("--data", rec_data, "sqpt-v1 dataset")->required();
    sqpt_rec->add_option("--tp", rec_tp, "tp or tni");
    sqpt_rec->add_option("--out", rec_out, "reconstructed chi (chi-v1)");

    // aoqpt build
    auto *aoqpt_cmd = app.add_subcommand("aoqpt", "two-setting transition matrices");
    aoqpt_cmd->require_subcommand(1);
    std::string build_data;
    std::string build_target = "cnot";
    std::string build_tp;
    std::string build_prefix = "tmat";
    auto *build = aoqpt_cmd->add_subcommand("build", "build T(x->y) and T(u->v) (tmat-v1) from a dataset");
    build->add_option("--data", build_data, "sqpt-v1 dataset holding the two-setting records")->required();
    build->add_option("--target", build_target, "target operation");
    build->add_option("--tp", build_tp, "tp or tni (default from the target)");
    build->add_option("--out-prefix", build_prefix, "writes <prefix>_xy.json and <prefix>_uv.json");

    // measure
    RunOptions meas_opts;
    std::string meas_xy;
    std::string meas_uv;
    std::string meas_chi;
    auto *measure = app.add_subcommand("measure", "bounds from transition matrices and/or direct values from chi");
    add_run_options(measure, meas_opts, true);
    measure->add_option("--xy", meas_xy, "tmat-v1 file of the x->y setting");
    measure->add_option("--uv", meas_uv, "tmat-v1 file of the u->v setting");
    measure->add_option("--chi", meas_chi, "chi-v1 file; adds direct values");

    // demo
    RunOptions demo_opts;
    bool demo_oracle = false;
    auto *demo = app.add_subcommand(
        "demo", "plan, simulate, build transition matrices and bound every measure; the direct column is the "
                "synthesized process, or its SQPT reconstruction with --oracle");
    add_run_options(demo, demo_opts, true);
    demo->add_flag("--oracle", demo_oracle, "take direct values from a full SQPT reconstruction");

    // oracle
    RunOptions oracle_opts;
    auto *oracle = app.add_subcommand("oracle", "full SQPT of the synthesized process and its direct measures");
    add_run_options(oracle, oracle_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    try {
        if (*plan) {
            const auto t = pipeline::resolve_target(plan_target);
            const auto scheme = plan_scheme == "sqpt" ? bases::Scheme::Sqpt : bases::Scheme::Aoqpt;
            const auto p = bases::plan_settings(t, scheme);
            std::printf("index,prep,meas\n");
            for (int i = 0; i < p.total(); ++i) {
                std::printf("%d,%s,%s\n", i, p.settings[i].prep.c_str(), p.settings[i].meas.c_str());
            }
            std::fprintf(stderr, "target %s scheme %s settings %d\n", t.name.c_str(), bases::to_string(scheme),
                         p.total());
        } else if (*simulate) {
            apply_config(simulate, sim_opts);
            const auto c = to_config(simulate, sim_opts);
            const auto t = pipeline::resolve_target(c.target);
            const auto mode = pipeline::tp_mode(c, t);
            const auto p = pipeline::synthesize(t, channels::NoiseSpec::parse(c.noise), mode);
            const auto scheme = sim_scheme == "sqpt" ? bases::Scheme::Sqpt : bases::Scheme::Aoqpt;
            const auto data = pipeline::simulate(p, t, scheme, c.shots, c.seed, c.exact);
            io::write_file(sim_out, io::dataset_to_json(data));
            std::printf("wrote %zu records to %s\n", data.records.size(), sim_out.c_str());
        } else if (*sqpt_run) {
            apply_config(sqpt_run, sqpt_run_opts);
            const auto c = to_config(sqpt_run, sqpt_run_opts);
            const auto r = pipeline::run_oracle(c);
            io::write_file(sqpt_run_out, io::chi_to_json(r.reconstruction.physical.process));
            std::printf("settings %d\nfidelity_to_target %.6f\nwrote %s\n", r.plan.total(),
                        measures::process_fidelity(r.reconstruction.physical.process, channels::ideal_process(r.target)),
                        sqpt_run_out.c_str());
        } else if (*sqpt_rec) {
            const auto data = io::dataset_from_json(io::read_file(rec_data));
            const int d = 1 << data.n_qubits;
            const auto kernel = tomo::build_inversion_kernel(channels::OperatorBasis::computational(d));
            const auto r = tomo::reconstruct_chi(data, kernel, channels::tp_mode_from_string(rec_tp));
            io::write_file(rec_out, io::chi_to_json(r.physical.process));
            std::printf("physicalize distance %.3e sweeps %d\nwrote %s\n", r.physical.distance, r.physical.sweeps,
                        rec_out.c_str());
        } else if (*build) {
            const auto data = io::dataset_from_json(io::read_file(build_data));
            const auto t = pipeline::resolve_target(build_target);
            const auto mode = build_tp.empty() ? t.default_tp_mode() : channels::tp_mode_from_string(build_tp);
            write_transitions(pipeline::transitions_from_data(data, t, mode), build_prefix);
            std::printf("wrote %s_xy.json and %s_uv.json\n", build_prefix.c_str(), build_prefix.c_str());
        } else if (*measure) {
            apply_config(measure, meas_opts);
            auto c = to_config(measure, meas_opts);
            const auto t = pipeline::resolve_target(c.target);
            const auto mode = pipeline::tp_mode(c, t);
            std::optional<channels::ProcessMatrix> truth;
            if (!meas_chi.empty()) {
                truth = io::chi_from_json(io::read_file(meas_chi));
            }
            io::MeasuresReport report;
            if (!meas_xy.empty() || !meas_uv.empty()) {
                if (meas_xy.empty() || meas_uv.empty()) {
                    throw ParameterError("--xy and --uv go together");
                }
                const auto xy = io::tmat_from_json(io::read_file(meas_xy));
                const auto uv = io::tmat_from_json(io::read_file(meas_uv));
                const auto spec = aoqpt::build_feasible_set(xy, uv, t, mode);
                report = pipeline::bounds(spec, c.measures, c.seesaw, c.jobs, truth ? &*truth : nullptr);
            } else if (truth) {
                report = pipeline::direct_report(*truth, t, c.measures, c.seesaw.sdp, c.jobs);
            } else {
                throw ParameterError("measure needs --xy/--uv or --chi");
            }
            print_table(report);
            io::write_file(out_path(meas_opts, "measures.csv"), io::measures_to_csv(report));
            io::write_file(out_path(meas_opts, "measures.json"), io::measures_to_json(report));
        } else if (*demo) {
            apply_config(demo, demo_opts);
            const auto c = to_config(demo, demo_opts);
            auto run = pipeline::run_aoqpt(c);
            const int sqpt_settings = bases::plan_settings(run.target, bases::Scheme::Sqpt).total();
            std::printf("target %s noise %s tp_mode %s\n", run.target.name.c_str(),
                        channels::NoiseSpec::parse(c.noise).to_string().c_str(), channels::to_string(run.spec.tp_mode));
            std::printf("settings aoqpt %d sqpt %d\n", run.plan.total(), sqpt_settings);
            if (demo_oracle) {
                const auto o = pipeline::run_oracle(c);
                for (size_t i = 0; i < run.report.rows.size(); ++i) {
                    run.report.rows[i].direct = o.report.rows[i].direct;
                }
                io::write_file(out_path(demo_opts, "oracle_chi.json"),
                               io::chi_to_json(o.reconstruction.physical.process));
            }
            print_table(run.report);
            io::write_file(out_path(demo_opts, "data.json"), io::dataset_to_json(run.data));
            write_transitions(run.transitions, out_path(demo_opts, "tmat").string());
            io::write_file(out_path(demo_opts, "report.csv"), io::measures_to_csv(run.report));
            io::write_file(out_path(demo_opts, "report.json"), io::measures_to_json(run.report));
        } else if (*oracle) {
            apply_config(oracle, oracle_opts);
            const auto c = to_config(oracle, oracle_opts);
            const auto run = pipeline::run_oracle(c);
            std::printf("target %s settings %d\n", run.target.name.c_str(), run.plan.total());
            std::printf("fidelity_to_target %.6f\n",
                        measures::process_fidelity(run.reconstruction.physical.process,
                                                   channels::ideal_process(run.target)));
            print_table(run.report);
            io::write_file(out_path(oracle_opts, "oracle_chi.json"),
                           io::chi_to_json(run.reconstruction.physical.process));
            io::write_file(out_path(oracle_opts, "oracle.csv"), io::measures_to_csv(run.report));
            io::write_file(out_path(oracle_opts, "oracle.json"), io::measures_to_json(run.report));
        }
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
