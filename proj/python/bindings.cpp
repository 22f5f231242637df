#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qdyn/io.hpp"
#include "qdyn/pipeline.hpp"

namespace py = pybind11;
using namespace qdyn;

namespace {

channels::ProcessMatrix process(const CMatrix &chi, const std::string &tp) {
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(chi.rows()))));
    if (chi.rows() != chi.cols() || d * d != chi.rows()) {
        throw DimensionError("chi must be d^2 x d^2");
    }
    return {channels::OperatorBasis::computational(d), chi, channels::tp_mode_from_string(tp)};
}

std::vector<measures::Measure> parse_measures(const std::vector<std::string> &names) {
    if (names.empty()) {
        return measures::all_measures();
    }
    std::vector<measures::Measure> out;
    for (const auto &n : names) {
        out.push_back(measures::measure_from_string(n));
    }
    return out;
}

py::dict row_dict(const io::MeasureRow &r) {
    py::dict d;
    d["measure"] = measures::to_string(r.measure);
    d["lower"] = r.lower;
    d["upper"] = r.upper;
    d["direct"] = r.direct;
    d["iterations"] = r.iterations;
    d["status"] = sdp::to_string(r.solver.status);
    d["seesaw_trace"] = r.seesaw_trace;
    d["seesaw_rejected"] = r.seesaw_rejected;
    return d;
}

py::list report_list(const io::MeasuresReport &r) {
    py::list out;
    for (const auto &row : r.rows) {
        out.append(row_dict(row));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Process capability bounds from two complementary settings";

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

    m.def("measure_names", [] {
        std::vector<std::string> out;
        for (auto x : measures::all_measures()) {
            out.emplace_back(measures::to_string(x));
        }
        return out;
    });

    m.def(
        "settings_count",
        [](const std::string &target, const std::string &scheme) {
            const auto s = scheme == "sqpt" ? bases::Scheme::Sqpt : bases::Scheme::Aoqpt;
            if (scheme != "sqpt" && scheme != "aoqpt") {
                throw ParameterError("scheme must be sqpt or aoqpt");
            }
            return bases::plan_settings(channels::target_by_name(target), s).total();
        },
        py::arg("target"), py::arg("scheme") = "aoqpt");

    m.def(
        "noisy_chi",
        [](const std::string &target, const std::string &noise) {
            const auto t = channels::target_by_name(target);
            return pipeline::synthesize(t, channels::NoiseSpec::parse(noise), t.default_tp_mode()).chi;
        },
        py::arg("target"), py::arg("noise") = "none",
        "Process matrix of the noisy target in the computational basis (equal to its Choi matrix).");

    m.def(
        "process_fidelity",
        [](const CMatrix &a, const CMatrix &b) { return measures::process_fidelity(process(a, "tp"), process(b, "tp")); },
        py::arg("a"), py::arg("b"));

    m.def(
        "transitions",
        [](const CMatrix &chi, const std::string &target) {
            const auto t = channels::target_by_name(target);
            const auto tp = aoqpt::transitions_from_process(process(chi, channels::to_string(t.default_tp_mode())), t);
            return py::make_tuple(tp.xy.t, tp.uv.t);
        },
        py::arg("chi"), py::arg("target"), "Exact (T_xy, T_uv) of a process.");

    m.def(
        "direct",
        [](const CMatrix &chi, const std::string &measure, const std::string &target) {
            const auto t = channels::target_by_name(target);
            const auto p = process(chi, channels::to_string(t.default_tp_mode()));
            return measures::direct(p, measures::measure_from_string(measure), t).value;
        },
        py::arg("chi"), py::arg("measure"), py::arg("target"));

    m.def(
        "bounds",
        [](const RMatrix &xy, const RMatrix &uv, const std::string &target, const std::vector<std::string> &which,
           const std::string &tp, int restarts, double seesaw_tol, int max_rounds, std::uint64_t seed) {
            const auto t = channels::target_by_name(target);
            const auto mode = tp.empty() ? t.default_tp_mode() : channels::tp_mode_from_string(tp);
            const aoqpt::TransitionMatrix txy{aoqpt::Setting::XY, static_cast<int>(xy.rows()), xy};
            const aoqpt::TransitionMatrix tuv{aoqpt::Setting::UV, static_cast<int>(uv.rows()), uv};
            const auto spec = aoqpt::build_feasible_set(txy, tuv, t, mode);
            measures::SeesawOptions opt;
            opt.restarts = restarts;
            opt.tol = seesaw_tol;
            opt.max_rounds = max_rounds;
            opt.seed = seed;
            io::MeasuresReport r;
            {
                py::gil_scoped_release release;
                r = pipeline::bounds(spec, parse_measures(which), opt, 0);
            }
            return report_list(r);
        },
        py::arg("xy"), py::arg("uv"), py::arg("target"), py::arg("measures") = std::vector<std::string>{},
        py::arg("tp") = "", py::arg("restarts") = 5, py::arg("seesaw_tol") = 1e-6, py::arg("max_rounds") = 100,
        py::arg("seed") = 1);

    m.def(
        "sqpt",
        [](const std::string &target, const std::string &noise, long shots, std::uint64_t seed) {
            pipeline::RunConfig c;
            c.target = target;
            c.noise = noise;
            c.exact = shots == 0;
            c.shots = shots;
            c.seed = seed;
            c.measures = {measures::Measure::Fidelity};
            const auto r = pipeline::run_oracle(c);
            return r.reconstruction.physical.process.chi;
        },
        py::arg("target"), py::arg("noise") = "none", py::arg("shots") = 0, py::arg("seed") = 1,
        "Full SQPT reconstruction in the computational basis; shots=0 uses exact probabilities.");

    m.def(
        "demo",
        [](const std::string &target, const std::string &noise, long shots, std::uint64_t seed,
           const std::vector<std::string> &which, int restarts) {
            pipeline::RunConfig c;
            c.target = target;
            c.noise = noise;
            c.exact = shots == 0;
            c.shots = shots;
            c.seed = seed;
            c.measures = parse_measures(which);
            c.seesaw.restarts = restarts;
            pipeline::AoqptRun r;
            {
                py::gil_scoped_release release;
                r = pipeline::run_aoqpt(c);
            }
            py::dict out;
            out["settings"] = r.plan.total();
            out["xy"] = r.transitions.xy.t;
            out["uv"] = r.transitions.uv.t;
            out["results"] = report_list(r.report);
            out["json"] = io::measures_to_json(r.report);
            return out;
        },
        py::arg("target") = "cnot", py::arg("noise") = "none", py::arg("shots") = 0, py::arg("seed") = 1,
        py::arg("measures") = std::vector<std::string>{}, py::arg("restarts") = 5);
}
