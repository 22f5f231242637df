#pragma once

#include <string>
#include <vector>

#include "qdyn/aoqpt.hpp"
#include "qdyn/channels.hpp"
#include "qdyn/measures.hpp"
#include "qdyn/tomo.hpp"

/// JSON file formats. Output is deterministic: fixed key order and
/// shortest round-trip formatting of doubles, so writing then reading a
/// document reproduces every number bit for bit.
///
///   chi-v1       {format, dim, basis_tag, tp_mode, [target], entries: [[re, im], ...] row-major}
///   sqpt-v1      {format, n_qubits, shots, exact, records: [{prep, input, meas, counts, lost}]}
///   tmat-v1      {format, k, setting, rows}
///   measures-v1  {format, target, tp_mode, results: [{measure, lower, upper, direct, solver, seesaw, witnesses}]}
namespace qdyn::io {

class FormatError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// For adapted-basis processes the target must be a builtin name; it is
/// stored alongside the entries so the basis can be rebuilt on load.
std::string chi_to_json(const channels::ProcessMatrix &p, const std::string &target = "");
channels::ProcessMatrix chi_from_json(const std::string &text);

std::string dataset_to_json(const tomo::Dataset &d);
tomo::Dataset dataset_from_json(const std::string &text);

std::string tmat_to_json(const aoqpt::TransitionMatrix &t);
aoqpt::TransitionMatrix tmat_from_json(const std::string &text);

/// "target-v1": {name, kraus (d x d entries), initial: [[re, im], ..] per
/// state, fourier_factors}. Validated by channels::make_target.
std::string target_to_json(const channels::TargetOperation &t);
channels::TargetOperation target_from_json(const std::string &text);

struct MeasureRow {
    measures::Measure measure;
    double lower = measures::kNaN;
    double upper = measures::kNaN;
    double direct = measures::kNaN;
    int iterations = 0;
    measures::SolverInfo solver;
    std::vector<double> seesaw_trace;
    double seesaw_rejected = 0.0;
    CMatrix chi_worst;  // trace-one computational chi', empty if absent
    CMatrix chi_best;
};

struct MeasuresReport {
    std::string target;
    channels::TpMode tp_mode = channels::TpMode::TracePreserving;
    std::vector<MeasureRow> rows;
};

std::string measures_to_json(const MeasuresReport &r);
MeasuresReport measures_from_json(const std::string &text);

/// measure,lower,upper,direct,gap,solver_iters with gap = upper - lower.
std::string measures_to_csv(const MeasuresReport &r);

std::string read_file(const std::string &path);
void write_file(const std::string &path, const std::string &content);

}  // namespace qdyn::io
