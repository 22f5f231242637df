#pragma once

#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdyn/types.hpp"

/// Quantum process representations: Kraus sets, process (chi) matrices in an
/// operator basis, the Choi action, target operations and noise models.
///
/// Computational operator basis: for a d-dimensional system E_j = |b><a| with
/// j = a*d + b (a is the input index, b the output index). In this basis the
/// process matrix of a map E equals its Choi matrix sum_{aa'} |a><a'| (x) E(|a><a'|),
/// so a trace-preserving map has Tr chi = d.
namespace qdyn::channels {

enum class TpMode { TracePreserving, TraceNonIncreasing };

const char *to_string(TpMode m);
TpMode tp_mode_from_string(std::string_view s);

inline constexpr double kKrausTol = 1e-10;

struct KrausSet {
    int dim = 0;
    std::vector<CMatrix> operators;

    /// sum_k A_k^dagger A_k
    CMatrix completeness() const;
    bool is_trace_preserving(double tol = kKrausTol) const;
};

/// Validates shapes and sum A^dagger A <= 1 (within kKrausTol).
KrausSet make_kraus(std::vector<CMatrix> ops);

CMatrix apply_kraus(const KrausSet &k, const CMatrix &rho);

/// second o first
KrausSet compose(const KrausSet &second, const KrausSet &first);

class OperatorBasis {
   public:
    enum class Kind { Computational, Pauli, TargetAdapted };

    static OperatorBasis computational(int d);
    /// Tensor products of P / sqrt(2), ordered as pauli::all_strings(n).
    static OperatorBasis pauli(int n_qubits);
    /// E_pq = |q_y><p_x| with index p*d + q. Both families must be complete
    /// orthonormal bases of C^d.
    static OperatorBasis target_adapted(std::span<const CVector> x, std::span<const CVector> y);

    int dim() const { return dim_; }
    int size() const { return dim_ * dim_; }
    Kind kind() const { return kind_; }
    /// "computational", "pauli" or "adapted"
    std::string tag() const;
    const CMatrix &element(int j) const { return elements_.at(j); }
    const std::vector<CMatrix> &elements() const { return elements_; }

    /// W with W_jm = Tr(C_j^dagger E_m), C the computational basis; the
    /// computational process matrix is W chi W^dagger.
    const CMatrix &to_computational() const { return w_; }

    /// True for bases in which the incoherent part (diagonal of chi) is meaningful.
    bool is_target_adapted() const { return kind_ != Kind::Pauli; }

   private:
    OperatorBasis(int d, Kind kind, std::vector<CMatrix> elements);

    int dim_ = 0;
    Kind kind_ = Kind::Computational;
    std::vector<CMatrix> elements_;
    CMatrix w_;
};

struct ProcessMatrix {
    OperatorBasis basis = OperatorBasis::computational(1);
    CMatrix chi;
    TpMode tp_mode = TpMode::TracePreserving;

    int dim() const { return basis.dim(); }
};

/// chi_mn = sum_k a_km a_kn^* with a_km = Tr(E_m^dagger A_k).
ProcessMatrix kraus_to_chi(const KrausSet &k, const OperatorBasis &basis);

ProcessMatrix change_basis(const ProcessMatrix &p, const OperatorBasis &to);
ProcessMatrix to_computational(const ProcessMatrix &p);

/// sum_mn chi_mn E_m rho E_n^dagger
CMatrix apply_process(const ProcessMatrix &p, const CMatrix &rho);

/// Computational chi divided by d (unit trace for trace-preserving maps).
CMatrix choi_state(const ProcessMatrix &p);

/// d * Tr_1[(rho^T (x) 1) chi_comp] for a Choi state chi_comp of dimension d^2.
CMatrix choi_apply(const CMatrix &chi_comp, const CMatrix &rho);

/// sum_mn chi_mn E_m^dagger E_n
CMatrix completeness(const ProcessMatrix &p);

/// TP: max |sum chi E^dagger E - 1| entry. TNI: largest eigenvalue of
/// (sum chi E^dagger E - 1), clipped at 0.
double trace_condition_violation(const ProcessMatrix &p);

/// Zeroes the off-diagonal chi entries. Requires a target-adapted basis.
ProcessMatrix incoherent_part(const ProcessMatrix &p);

/// A partial isometry S acting as S|m_x> = |m_y> on a k-dimensional subspace.
struct TargetOperation {
    std::string name;
    int n_qubits = 0;
    CMatrix kraus;
    int k = 0;
    std::vector<CVector> initial;
    std::vector<CVector> final_states;
    /// Local dimensions for the complementary basis of the subspace.
    std::vector<int> fourier_factors;

    int dim() const { return static_cast<int>(kraus.rows()); }
    bool is_unitary() const { return k == dim(); }
    TpMode default_tp_mode() const;
};

/// Checks that S^dagger S is a projector of rank k = initial.size() and that
/// the initial states are orthonormal and inside its support.
TargetOperation make_target(std::string name, const CMatrix &kraus, std::vector<CVector> initial,
                            std::vector<int> fourier_factors);

TargetOperation builtin_cnot();
/// S = |00><00| + |11><11| on two photonic qubits.
TargetOperation builtin_fusion();
TargetOperation builtin_identity(int n_qubits);
TargetOperation target_by_name(std::string_view name);

/// Initial (resp. final) family completed to an orthonormal basis of C^d by
/// Gram-Schmidt over the computational basis.
std::vector<CVector> extended_initial(const TargetOperation &t);
std::vector<CVector> extended_final(const TargetOperation &t);
OperatorBasis adapted_basis(const TargetOperation &t);

/// Ideal process {S} in the computational basis.
ProcessMatrix ideal_process(const TargetOperation &t);

struct NoiseTerm {
    enum class Kind { Depolarizing, Dephasing, AmplitudeDamping };
    Kind kind;
    double p;
};

/// Noise applied after the target, terms in order. Text form "none" or
/// "depolarizing:0.1+dephasing:0.05+amplitude_damping:0.02".
struct NoiseSpec {
    std::vector<NoiseTerm> terms;

    static NoiseSpec parse(std::string_view text);
    std::string to_string() const;
};

/// depolarizing: (1-p) rho + p Tr(rho) 1/d on the whole register.
/// dephasing: (1-p/2) rho + (p/2) Z rho Z on every qubit.
/// amplitude_damping: gamma on every qubit.
KrausSet noise_channel(const NoiseTerm &t, int n_qubits);

KrausSet make_noisy(const TargetOperation &target, const NoiseSpec &noise);

KrausSet unitary_channel(const CMatrix &u);
KrausSet identity_channel(int d);

/// Haar-random unitary via QR of a complex Gaussian matrix.
CMatrix random_unitary(int d, std::mt19937_64 &rng);
/// Haar unitary followed by depolarizing(p); d must be a power of two.
KrausSet random_channel(int d, double p, std::mt19937_64 &rng);
/// Random channel with `rank` Kraus operators from a Ginibre ensemble.
KrausSet random_kraus_channel(int d, int rank, std::mt19937_64 &rng);

}  // namespace qdyn::channels
