#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qdyn/bases.hpp"
#include "qdyn/channels.hpp"
#include "qdyn/tomo.hpp"

/// Transition matrices of the two complementary settings and the decision set
/// of process matrices consistent with them.
namespace qdyn::aoqpt {

enum class Setting { XY, UV };

const char *to_string(Setting s);
Setting setting_from_string(std::string_view s);

/// T_mn = P(n_b | m_a), rows indexed by the prepared state.
struct TransitionMatrix {
    Setting setting = Setting::XY;
    int k = 0;
    RMatrix t;
};

/// Born-rule probabilities <n|E(|m><m|)|n> for m in prep, n in meas.
TransitionMatrix transition_from_process(const channels::ProcessMatrix &p, const bases::BasisFamily &prep,
                                         const bases::BasisFamily &meas, Setting setting);

struct TransitionPair {
    TransitionMatrix xy;
    TransitionMatrix uv;
};

TransitionPair transitions_from_process(const channels::ProcessMatrix &p, const channels::TargetOperation &t);

/// Coordinates U_pm = <p_x|m_u> of the complementary family in the x family.
CMatrix fourier_coefficients(const bases::AoqptFamilies &f);

/// T^{u->v}_mn = sum_{pqrs} chi_{pq,rs} U*_qn U_pm U*_rm U_sn, with chi in the
/// target-adapted basis and p, q, r, s restricted to the k-dimensional subspace.
RMatrix fourier_double_sum(const CMatrix &chi_adapted, const CMatrix &u, int d);

struct ChiIdentityReport {
    double xy_error = 0.0;  // max |T^{x->y}_mn - chi_{mn,mn}|
    double uv_error = 0.0;  // max |Born-rule T^{u->v} - double Fourier sum|

    double max_error() const { return std::max(xy_error, uv_error); }
};

ChiIdentityReport verify_chi_identity(const channels::ProcessMatrix &p, const channels::TargetOperation &t);

/// Row-wise Euclidean projection onto {T >= 0, row sum = 1} (trace
/// preserving) or {T >= 0, row sum <= 1}. Throws ParameterError on an
/// all-zero row.
TransitionMatrix project_transition(const RMatrix &raw, Setting setting, channels::TpMode mode);

/// sum_P c_P <P>, with <I...I> = 1 unless given.
double projector_probability(const std::vector<bases::PauliTerm> &decomposition,
                             const std::map<std::string, double> &expectations);

/// Assembles T from Pauli-setting records: every prepared projector and every
/// measured projector is expanded in Pauli strings, and Tr(Q E(P)) is
/// estimated from the records whose preparation and measurement cover P and Q.
/// The raw matrix is then passed through project_transition.
TransitionMatrix transition_from_dataset(const tomo::Dataset &data, const bases::BasisFamily &prep,
                                         const bases::BasisFamily &meas, Setting setting, channels::TpMode mode);

/// Unprojected estimate used by transition_from_dataset.
RMatrix raw_transition_from_dataset(const tomo::Dataset &data, const bases::BasisFamily &prep,
                                    const bases::BasisFamily &meas);

/// Tr(weight chi') = value for the unnormalized computational chi'.
struct DataConstraint {
    Setting setting;
    int m;
    int n;
    CMatrix weight;  // rho_m^T (x) |n><n|
    double value;
};

struct FeasibleSetSpec {
    channels::TargetOperation target;
    channels::TpMode tp_mode = channels::TpMode::TracePreserving;
    std::vector<DataConstraint> constraints;
    TransitionMatrix xy;
    TransitionMatrix uv;

    int dim() const { return target.dim(); }
};

/// 2k^2 data equalities, chi' >= 0 and the TP (or TNI) condition.
FeasibleSetSpec build_feasible_set(const TransitionMatrix &xy, const TransitionMatrix &uv,
                                   const channels::TargetOperation &target, channels::TpMode tp_mode);

struct FeasibilityReport {
    double max_data_residual = 0.0;
    double min_eigenvalue = 0.0;
    double trace_violation = 0.0;
};

FeasibilityReport check_feasible(const FeasibleSetSpec &spec, const channels::ProcessMatrix &p);

}  // namespace qdyn::aoqpt
