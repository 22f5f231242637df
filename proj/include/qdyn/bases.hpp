#pragma once

#include <span>
#include <string>
#include <vector>

#include "qdyn/channels.hpp"
#include "qdyn/types.hpp"

/// Preparation and measurement bases, Pauli expansions and the planner that
/// counts Pauli experimental settings.
namespace qdyn::bases {

/// x: preparation basis, y = S x: measurement basis, u: complementary
/// preparation basis, v = S u.
enum class Label { X, Y, U, V };

const char *to_string(Label l);

struct BasisFamily {
    Label label = Label::X;
    int dim = 0;  // Hilbert space dimension of the states
    std::vector<CVector> states;

    int size() const { return static_cast<int>(states.size()); }
};

BasisFamily computational_basis(int d, Label label = Label::X);

/// |m_u> = k^{-1/2} sum_j w^{-jm} |j_x>, w = exp(2 pi i / k), k = base.size().
BasisFamily fourier_basis(const BasisFamily &base, Label label = Label::U);

/// Mixed-radix Fourier transform: the index j of `base` is split into digits
/// over `factor_dims` (most significant first) and each digit is Fourier
/// transformed separately. factor_dims = {k} is fourier_basis.
BasisFamily complementary_basis(const BasisFamily &base, std::span<const int> factor_dims, Label label = Label::U);

/// S applied to every state of `in`.
BasisFamily image_family(const CMatrix &s, const BasisFamily &in, Label label);

/// Multiplies each state by a phase so that its first nonzero amplitude is
/// real positive.
void fix_phases(BasisFamily &f);

/// max |<i|j> - delta_ij|
double gram_deviation(const BasisFamily &f);

/// max | |<a_i|b_j>|^2 - 1/k | over both families of size k.
double unbiasedness_deviation(const BasisFamily &a, const BasisFamily &b);

struct AoqptFamilies {
    BasisFamily x, y, u, v;
};

AoqptFamilies aoqpt_families(const channels::TargetOperation &t);

struct PauliTerm {
    std::string pauli;
    double coeff;
};

/// M = sum_P c_P P over n-qubit Pauli strings; terms with |c_P| <= 1e-14 are
/// dropped. Throws NotHermitianError for non-Hermitian input.
std::vector<PauliTerm> pauli_decompose(const CMatrix &m);

CMatrix pauli_reconstruct(const std::vector<PauliTerm> &terms, int n_qubits);

enum class Scheme { Sqpt, Aoqpt };

const char *to_string(Scheme s);

struct PauliSetting {
    std::string prep;
    std::string meas;
    int native = 0;  // index of the native (basis-level) setting it belongs to
};

struct SettingsPlan {
    int n_qubits = 0;
    Scheme scheme = Scheme::Sqpt;
    std::vector<PauliSetting> settings;

    int total() const { return static_cast<int>(settings.size()); }
};

/// Product Pauli settings (strings over {X,Y,Z}) able to realize every
/// projector of the family. Identity factors are wildcards: strings are merged
/// when they agree on every qubit where both are non-identity, and leftover
/// identity positions are set to Z.
std::vector<std::string> family_settings(const BasisFamily &f, int n_qubits);

/// SQPT: all 3^N x 3^N Pauli preparation/measurement pairs. AOQPT: the two
/// native settings (x -> y) and (u -> v), each expanded to the product of its
/// preparation and measurement Pauli settings.
SettingsPlan plan_settings(const channels::TargetOperation &t, Scheme scheme);

}  // namespace qdyn::bases
