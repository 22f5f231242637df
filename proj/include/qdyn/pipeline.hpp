#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdyn/aoqpt.hpp"
#include "qdyn/bases.hpp"
#include "qdyn/io.hpp"
#include "qdyn/measures.hpp"
#include "qdyn/tomo.hpp"

/// End-to-end runs: synthesize a noisy process, simulate one of the two
/// schemes, build transition matrices and evaluate measure bounds.
namespace qdyn::pipeline {

struct RunConfig {
    std::string target = "cnot";
    std::string noise = "none";
    long shots = 0;  // ignored when exact
    bool exact = true;
    std::uint64_t seed = 1;
    std::vector<measures::Measure> measures = measures::all_measures();
    std::optional<channels::TpMode> tp_override;
    measures::SeesawOptions seesaw;
    int jobs = 0;  // 0: one worker per measure
};

/// A built-in name (cnot, fusion, identity1, identity2) or a path to a
/// target-v1 file.
channels::TargetOperation resolve_target(const std::string &name);

/// Checks the invariants of a configuration (seed required with finite shots,
/// shots positive unless exact) and throws ParameterError otherwise.
void validate(const RunConfig &c);

channels::TpMode tp_mode(const RunConfig &c, const channels::TargetOperation &t);

/// Noise applied after the target, in the computational basis.
channels::ProcessMatrix synthesize(const channels::TargetOperation &t, const channels::NoiseSpec &noise,
                                   channels::TpMode mode);

tomo::Dataset simulate(const channels::ProcessMatrix &p, const channels::TargetOperation &t, bases::Scheme scheme,
                       long shots, std::uint64_t seed, bool exact);

/// (x -> y, u -> v) transition matrices assembled from Pauli-setting records.
aoqpt::TransitionPair transitions_from_data(const tomo::Dataset &data, const channels::TargetOperation &t,
                                            channels::TpMode mode);

/// Lower and upper bounds for every requested measure on a bounded worker
/// pool; `truth`, when given, adds the direct values.
io::MeasuresReport bounds(const aoqpt::FeasibleSetSpec &spec, const std::vector<measures::Measure> &which,
                          const measures::SeesawOptions &opt, int jobs,
                          const channels::ProcessMatrix *truth = nullptr);

/// Direct values only.
io::MeasuresReport direct_report(const channels::ProcessMatrix &p, const channels::TargetOperation &t,
                                 const std::vector<measures::Measure> &which, const sdp::Settings &s, int jobs);

struct AoqptRun {
    channels::TargetOperation target;
    bases::SettingsPlan plan;
    channels::ProcessMatrix process;
    tomo::Dataset data;
    aoqpt::TransitionPair transitions;
    aoqpt::FeasibleSetSpec spec;
    io::MeasuresReport report;
};

/// plan -> simulate -> transition matrices -> bounds, with direct values on
/// the synthesized process.
AoqptRun run_aoqpt(const RunConfig &c);

struct OracleRun {
    channels::TargetOperation target;
    bases::SettingsPlan plan;
    channels::ProcessMatrix process;
    tomo::Dataset data;
    tomo::Reconstruction reconstruction;
    io::MeasuresReport report;  // direct values on the reconstructed process
};

/// Full SQPT of the synthesized process and direct measures of the estimate.
OracleRun run_oracle(const RunConfig &c);

}  // namespace qdyn::pipeline
