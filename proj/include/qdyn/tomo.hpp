#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qdyn/bases.hpp"
#include "qdyn/channels.hpp"

/// Standard process tomography on Pauli settings: data simulation, output
/// state estimation, linear inversion and projection onto physical processes.
namespace qdyn::tomo {

/// Outcome statistics for one input state of one Pauli setting. The input is
/// eigenstate `input` of `prep` (see pauli::eigenstate); `counts[o]` refers to
/// eigenstate o of `meas`. `lost` counts runs with no detection (trace
/// non-increasing processes). In exact mode the numbers are probabilities.
struct Record {
    std::string prep;
    int input = 0;
    std::string meas;
    std::vector<double> counts;
    double lost = 0.0;
};

struct Dataset {
    int n_qubits = 0;
    long shots = 0;  // per input state and setting; 0 in exact mode
    bool exact = false;
    std::vector<Record> records;
};

/// Born-rule statistics for every input eigenstate of every setting. With
/// exact = true the records hold probabilities; otherwise multinomial samples
/// of `shots` runs, drawn from a generator seeded with (seed, setting index).
Dataset simulate_counts(const channels::ProcessMatrix &process, std::span<const bases::PauliSetting> settings,
                        long shots, std::uint64_t seed, bool exact = false);

/// Linear-inversion estimate of the (unnormalized) output state for eigenstate
/// `input` of preparation string `prep`, using every record with that
/// preparation. Expectation values of a Pauli string are averaged over all
/// measurement settings that cover it.
CMatrix estimate_output(const Dataset &data, const std::string &prep, int input);

struct InversionKernel {
    int dim = 0;
    channels::OperatorBasis basis = channels::OperatorBasis::computational(1);
    std::vector<CMatrix> rho_basis;
    CMatrix b;  // B(mn, jk), rows m*D+n, cols j*D+k, D = d^2
    CMatrix k;  // generalized inverse: chi_vec = K lambda_vec
    CMatrix expand_map;  // vec(op) -> coefficients in rho_basis

    /// Expansion coefficients of an operator in rho_basis.
    CVector expand(const CMatrix &op) const;
};

/// Dyads |m><n| with index m*d + n.
std::vector<CMatrix> dyad_basis(int d);

/// B from E_m rho_j E_n^dagger = sum_k B_{mn,jk} rho_k; K is the pseudo-inverse
/// of B^T. Throws ParameterError if rho_basis does not span the operator space.
InversionKernel build_inversion_kernel(const channels::OperatorBasis &basis,
                                       std::vector<CMatrix> rho_basis);
InversionKernel build_inversion_kernel(const channels::OperatorBasis &basis);

/// lambda_jk from E(rho_j) = sum_k lambda_jk rho_k; row-major j*D + k.
CVector lambda_from_outputs(const InversionKernel &kernel, std::span<const CMatrix> outputs);

/// lambda of a known process (for round-trip checks).
CVector lambda_from_process(const InversionKernel &kernel, const channels::ProcessMatrix &p);

CMatrix chi_from_lambda(const InversionKernel &kernel, const CVector &lambda);

/// Outputs E(|m><n|) for all dyads, assembled from Pauli-eigenstate outputs.
std::vector<CMatrix> dyad_outputs(const Dataset &data);

struct PhysicalizeResult {
    channels::ProcessMatrix process;
    double distance = 0.0;  // Frobenius distance from the input
    int sweeps = 0;
    bool converged = false;
};

struct PhysicalizeOptions {
    double tol = 1e-9;
    int max_sweeps = 10000;
};

/// Frobenius-nearest point of {chi >= 0} intersected with the TP (or TNI) set,
/// by Dykstra's alternating projections. The result is in the input's basis.
PhysicalizeResult physicalize(const channels::ProcessMatrix &raw, PhysicalizeOptions opt = {});

struct MleOptions {
    double tol = 1e-10;  // stop when the log-likelihood gains less per iteration
    int max_iter = 5000;
    double mix = 0.1;    // weight of the maximally mixed point in the start
};

struct MleResult {
    channels::ProcessMatrix process;  // computational basis, TP
    double log_likelihood = 0.0;
    int iterations = 0;
};

/// Maximum-likelihood TP process from sampled counts by the iterative
/// R chi R map with the trace-preserving normalization, started from
/// (1 - mix) start + mix 1/d.
MleResult maximum_likelihood(const Dataset &data, const channels::ProcessMatrix &start, MleOptions opt = {});

struct Reconstruction {
    channels::ProcessMatrix linear;  // linear-inversion estimate
    PhysicalizeResult physical;      // final estimate; refined by maximum_likelihood for sampled TP data
    int mle_iterations = 0;
};

/// Linear inversion from a full Pauli dataset followed by physicalize and, for
/// sampled data in TP mode, maximum_likelihood. Throws ParameterError when a
/// (prep, meas) Pauli setting is missing.
Reconstruction reconstruct_chi(const Dataset &data, const InversionKernel &kernel, channels::TpMode tp_mode);

}  // namespace qdyn::tomo
