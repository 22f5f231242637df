#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "qdyn/aoqpt.hpp"
#include "qdyn/channels.hpp"
#include "qdyn/sdp.hpp"

/// Capability measures of a process and their bounds from two-setting data.
///
/// All measures act on the trace-normalized Choi matrix J = chi_comp / Tr chi_comp.
/// An incapable process is one explainable by classical realism (Dyn) or one
/// that maps every pure product input to a state with positive partial
/// transpose (Cre). With D the cone of unnormalized incapable processes:
///
///   composition  alpha = min 1 - Tr X   s.t.  J - X >= 0, X in D
///   robustness   beta  = min Tr X - 1   s.t.  X - J >= 0, X in D
namespace qdyn::measures {

enum class Kind { Dyn, Cre };
enum class Measure { AlphaDyn, BetaDyn, AlphaCre, BetaCre, Fidelity };

const char *to_string(Kind k);
const char *to_string(Measure m);
Measure measure_from_string(std::string_view s);
std::vector<Measure> all_measures();
Kind kind_of(Measure m);
bool is_alpha(Measure m);

/// Local-realistic model: settings are the Pauli strings over {X,Y,Z}^N, each
/// with 2^N product eigenprojectors; an object fixes a +-1 value for X, Y and
/// Z on every qubit (8^N objects), and the response to a setting is the
/// product of the single-qubit indicators.
struct RealismModel {
    int n_qubits = 0;
    std::vector<std::string> settings;
    int outcomes = 0;
    int objects = 0;
    std::vector<std::vector<CMatrix>> sigma;  // sigma[x][a]

    /// p(a_x | v_mu), 0 or 1.
    int response(int mu, int x, int a) const;
};

RealismModel build_realism_model(int n_qubits);

/// The 36 inputs {|0>,|1>,|+>,|->,|+i>,|-i>}^(x)2 used for the Cre constraints.
std::vector<CMatrix> product_inputs();

CMatrix normalized_choi(const channels::ProcessMatrix &p);

struct SolverInfo {
    sdp::Status status = sdp::Status::MaxIter;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    int solves = 0;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct MeasureResult {
    Measure measure = Measure::AlphaCre;
    double value = kNaN;  // direct primal or dual value
    double lower = kNaN;
    double upper = kNaN;

    CMatrix chi_worst;    // trace-one chi' attaining the lower bound
    CMatrix chi_best;     // trace-one chi' attaining the upper bound
    CMatrix incapable;    // X, the unnormalized incapable part
    CMatrix complement;   // J - X (alpha) or X - J (beta)
    CMatrix certificate;  // F (alpha) or G (beta)
    std::vector<CMatrix> multipliers;  // K_{a|x} (Dyn) or K_m (Cre)

    SolverInfo solver;
    std::vector<double> seesaw_trace;  // accepted per-round values of the best restart
    double seesaw_rejected = 0.0;      // largest decrease seen in a rejected round
    int restarts = 0;
};

/// Primal forms on the true process.
MeasureResult alpha_direct(const channels::ProcessMatrix &p, Kind kind, const sdp::Settings &s = sdp::Settings::from_env());
MeasureResult beta_direct(const channels::ProcessMatrix &p, Kind kind, const sdp::Settings &s = sdp::Settings::from_env());

/// Dual forms: alpha = max 1 - Tr(F J), beta = max Tr(G J) - 1, with the
/// multipliers K returned as certificates.
MeasureResult alpha_dual(const channels::ProcessMatrix &p, Kind kind, const sdp::Settings &s = sdp::Settings::from_env());
MeasureResult beta_dual(const channels::ProcessMatrix &p, Kind kind, const sdp::Settings &s = sdp::Settings::from_env());

/// Smallest eigenvalue over the dual constraints evaluated at the certificate
/// of a dual result (nonnegative up to solver tolerance when feasible).
double certificate_violation(const MeasureResult &dual, int dim);

/// Tr(Ja Jb) of the trace-normalized Choi matrices.
double process_fidelity(const channels::ProcessMatrix &a, const channels::ProcessMatrix &b);

/// Direct value of a measure; Fidelity is taken against the target's ideal
/// process.
MeasureResult direct(const channels::ProcessMatrix &p, Measure m, const channels::TargetOperation &target,
                     const sdp::Settings &s = sdp::Settings::from_env());

/// Minimum-norm solution of the data (and TP) equalities, projected onto the
/// PSD cone and normalized to unit trace.
CMatrix least_squares_point(const aoqpt::FeasibleSetSpec &spec);

/// Q_min over all chi' consistent with the data, from one joint SDP.
MeasureResult aoqpt_lower(const aoqpt::FeasibleSetSpec &spec, Measure m,
                          const sdp::Settings &s = sdp::Settings::from_env());

struct SeesawOptions {
    int restarts = 5;
    double tol = 1e-6;
    int max_rounds = 100;
    int step_max_iter = 20000;  // per SDP inside the alternation
    double accept_gap = 1e-5;   // a step stopped at step_max_iter is kept if its gap is below this
    std::uint64_t seed = 1;
    sdp::Settings sdp = sdp::Settings::from_env();
};

/// Q_max over the same set. Fidelity is a single SDP; alpha and beta use
/// alternating maximization over chi' and the dual certificate, restarted
/// from perturbed initial certificates. The value is attained by chi_best, so
/// it never exceeds the true maximum beyond solver accuracy.
MeasureResult aoqpt_upper(const aoqpt::FeasibleSetSpec &spec, Measure m, const SeesawOptions &opt = {});

}  // namespace qdyn::measures
