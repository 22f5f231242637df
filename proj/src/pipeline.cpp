#include "qdyn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>

namespace qdyn::pipeline {

using channels::ProcessMatrix;
using channels::TpMode;
using measures::Measure;

namespace {

// Runs f(0..n-1) on at most `jobs` threads; rethrows the first failure.
void parallel_for(int n, int jobs, const std::function<void(int)> &f) {
    const int workers = std::max(1, std::min(n, jobs > 0 ? jobs : n));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

void merge(measures::SolverInfo &into, const measures::SolverInfo &s) {
    if (into.solves == 0 || s.status != sdp::Status::Optimal) {
        into.status = s.status;
    }
    into.iterations += s.iterations;
    into.primal_residual = std::max(into.primal_residual, s.primal_residual);
    into.dual_residual = std::max(into.dual_residual, s.dual_residual);
    into.gap = std::max(into.gap, s.gap);
    into.solves += s.solves;
}

}  // namespace

channels::TargetOperation resolve_target(const std::string &name) {
    if (name.ends_with(".json")) {
        return io::target_from_json(io::read_file(name));
    }
    return channels::target_by_name(name);
}

void validate(const RunConfig &c) {
    resolve_target(c.target);
    channels::NoiseSpec::parse(c.noise);
    if (!c.exact && c.shots <= 0) {
        throw ParameterError("shots must be positive unless exact mode is selected");
    }
    if (c.measures.empty()) {
        throw ParameterError("no measures requested");
    }
    if (c.seesaw.restarts < 1 || c.seesaw.max_rounds < 1) {
        throw ParameterError("restarts and max_rounds must be positive");
    }
}

TpMode tp_mode(const RunConfig &c, const channels::TargetOperation &t) {
    return c.tp_override.value_or(t.default_tp_mode());
}

ProcessMatrix synthesize(const channels::TargetOperation &t, const channels::NoiseSpec &noise, TpMode mode) {
    auto p = channels::kraus_to_chi(channels::make_noisy(t, noise), channels::OperatorBasis::computational(t.dim()));
    p.tp_mode = mode;
    return p;
}

tomo::Dataset simulate(const ProcessMatrix &p, const channels::TargetOperation &t, bases::Scheme scheme, long shots,
                       std::uint64_t seed, bool exact) {
    const auto plan = bases::plan_settings(t, scheme);
    return tomo::simulate_counts(p, plan.settings, exact ? 0 : shots, seed, exact);
}

aoqpt::TransitionPair transitions_from_data(const tomo::Dataset &data, const channels::TargetOperation &t,
                                            TpMode mode) {
    const auto f = bases::aoqpt_families(t);
    return {aoqpt::transition_from_dataset(data, f.x, f.y, aoqpt::Setting::XY, mode),
            aoqpt::transition_from_dataset(data, f.u, f.v, aoqpt::Setting::UV, mode)};
}

io::MeasuresReport bounds(const aoqpt::FeasibleSetSpec &spec, const std::vector<Measure> &which,
                          const measures::SeesawOptions &opt, int jobs, const ProcessMatrix *truth) {
    io::MeasuresReport r;
    r.target = spec.target.name;
    r.tp_mode = spec.tp_mode;
    r.rows.resize(which.size());
    parallel_for(static_cast<int>(which.size()), jobs, [&](int i) {
        const Measure m = which[i];
        io::MeasureRow row;
        row.measure = m;
        const auto lo = measures::aoqpt_lower(spec, m, opt.sdp);
        const auto up = measures::aoqpt_upper(spec, m, opt);
        row.lower = lo.lower;
        row.upper = up.upper;
        merge(row.solver, lo.solver);
        merge(row.solver, up.solver);
        row.seesaw_trace = up.seesaw_trace;
        row.seesaw_rejected = up.seesaw_rejected;
        row.chi_worst = lo.chi_worst;
        row.chi_best = up.chi_best;
        if (truth != nullptr) {
            const auto d = measures::direct(*truth, m, spec.target, opt.sdp);
            row.direct = d.value;
            merge(row.solver, d.solver);
        }
        row.iterations = row.solver.iterations;
        r.rows[i] = std::move(row);
    });
    return r;
}

io::MeasuresReport direct_report(const ProcessMatrix &p, const channels::TargetOperation &t,
                                 const std::vector<Measure> &which, const sdp::Settings &s, int jobs) {
    io::MeasuresReport r;
    r.target = t.name;
    r.tp_mode = p.tp_mode;
    r.rows.resize(which.size());
    parallel_for(static_cast<int>(which.size()), jobs, [&](int i) {
        io::MeasureRow row;
        row.measure = which[i];
        const auto d = measures::direct(p, which[i], t, s);
        row.direct = d.value;
        row.solver = d.solver;
        row.iterations = d.solver.iterations;
        r.rows[i] = std::move(row);
    });
    return r;
}

AoqptRun run_aoqpt(const RunConfig &c) {
    validate(c);
    const auto target = resolve_target(c.target);
    const TpMode mode = tp_mode(c, target);
    AoqptRun run{target, bases::plan_settings(target, bases::Scheme::Aoqpt),
                 synthesize(target, channels::NoiseSpec::parse(c.noise), mode), {}, {}, {}, {}};
    run.data = tomo::simulate_counts(run.process, run.plan.settings, c.exact ? 0 : c.shots, c.seed, c.exact);
    run.transitions = transitions_from_data(run.data, target, mode);
    run.spec = aoqpt::build_feasible_set(run.transitions.xy, run.transitions.uv, target, mode);
    run.report = bounds(run.spec, c.measures, c.seesaw, c.jobs, &run.process);
    return run;
}

OracleRun run_oracle(const RunConfig &c) {
    validate(c);
    const auto target = resolve_target(c.target);
    const TpMode mode = tp_mode(c, target);
    OracleRun run{target, bases::plan_settings(target, bases::Scheme::Sqpt),
                  synthesize(target, channels::NoiseSpec::parse(c.noise), mode), {}, {}, {}};
    run.data = tomo::simulate_counts(run.process, run.plan.settings, c.exact ? 0 : c.shots, c.seed, c.exact);
    const auto kernel = tomo::build_inversion_kernel(channels::OperatorBasis::computational(target.dim()));
    run.reconstruction = tomo::reconstruct_chi(run.data, kernel, mode);
    run.report = direct_report(run.reconstruction.physical.process, target, c.measures, c.seesaw.sdp, c.jobs);
    return run;
}

}  // namespace qdyn::pipeline
