#include "qdyn/channels.hpp"

#include <Eigen/QR>
#include <charconv>
#include <cmath>
#include <sstream>

#include "qdyn/linalg.hpp"
#include "qdyn/pauli.hpp"

namespace qdyn::channels {

namespace {

CMatrix dyad(const CVector &out, const CVector &in) {
    return out * in.adjoint();
}

int qubit_count(int d) {
    int n = 0;
    while ((1 << n) < d) {
        ++n;
    }
    if ((1 << n) != d) {
        throw DimensionError("dimension " + std::to_string(d) + " is not a power of two");
    }
    return n;
}

void require_square(const CMatrix &m, int d, const char *what) {
    if (m.rows() != d || m.cols() != d) {
        std::ostringstream ss;
        ss << what << ": expected " << d << "x" << d << ", got " << m.rows() << "x" << m.cols();
        throw DimensionError(ss.str());
    }
}

std::vector<CVector> complete_basis(std::vector<CVector> vecs, int d) {
    for (int i = 0; i < d && static_cast<int>(vecs.size()) < d; ++i) {
        CVector e = CVector::Zero(d);
        e(i) = 1.0;
        for (const auto &v : vecs) {
            e -= v * v.dot(e);
        }
        const double nrm = e.norm();
        if (nrm > 1e-8) {
            vecs.push_back(e / nrm);
        }
    }
    return vecs;
}

}  // namespace

const char *to_string(TpMode m) {
    return m == TpMode::TracePreserving ? "tp" : "tni";
}

TpMode tp_mode_from_string(std::string_view s) {
    if (s == "tp") {
        return TpMode::TracePreserving;
    }
    if (s == "tni") {
        return TpMode::TraceNonIncreasing;
    }
    throw ParameterError("unknown trace mode '" + std::string(s) + "' (expected tp or tni)");
}

CMatrix KrausSet::completeness() const {
    CMatrix out = CMatrix::Zero(dim, dim);
    for (const auto &a : operators) {
        out += a.adjoint() * a;
    }
    return out;
}

bool KrausSet::is_trace_preserving(double tol) const {
    return (completeness() - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() <= tol;
}

KrausSet make_kraus(std::vector<CMatrix> ops) {
    if (ops.empty()) {
        throw ParameterError("make_kraus: no operators");
    }
    const int d = static_cast<int>(ops.front().rows());
    for (const auto &a : ops) {
        require_square(a, d, "make_kraus");
    }
    KrausSet k{d, std::move(ops)};
    if (linalg::max_eigenvalue(k.completeness()) > 1.0 + kKrausTol) {
        throw ParameterError("make_kraus: sum of A^dagger A exceeds the identity");
    }
    return k;
}

CMatrix apply_kraus(const KrausSet &k, const CMatrix &rho) {
    require_square(rho, k.dim, "apply_kraus");
    CMatrix out = CMatrix::Zero(k.dim, k.dim);
    for (const auto &a : k.operators) {
        out += a * rho * a.adjoint();
    }
    return out;
}

KrausSet compose(const KrausSet &second, const KrausSet &first) {
    if (second.dim != first.dim) {
        throw DimensionError("compose: dimension mismatch");
    }
    KrausSet out{first.dim, {}};
    for (const auto &b : second.operators) {
        for (const auto &a : first.operators) {
            out.operators.push_back(b * a);
        }
    }
    return out;
}

OperatorBasis::OperatorBasis(int d, Kind kind, std::vector<CMatrix> elements)
    : dim_(d), kind_(kind), elements_(std::move(elements)) {
    const int n = d * d;
    w_.resize(n, n);
    for (int m = 0; m < n; ++m) {
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                w_(a * d + b, m) = elements_[m](b, a);
            }
        }
    }
}

OperatorBasis OperatorBasis::computational(int d) {
    if (d <= 0) {
        throw DimensionError("computational basis: dimension must be positive");
    }
    std::vector<CMatrix> els;
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            CMatrix e = CMatrix::Zero(d, d);
            e(b, a) = 1.0;
            els.push_back(std::move(e));
        }
    }
    return OperatorBasis(d, Kind::Computational, std::move(els));
}

OperatorBasis OperatorBasis::pauli(int n_qubits) {
    const double scale = std::pow(2.0, -0.5 * n_qubits);
    std::vector<CMatrix> els;
    for (const auto &s : pauli::all_strings(n_qubits)) {
        els.push_back(pauli::string_matrix(s) * scale);
    }
    return OperatorBasis(1 << n_qubits, Kind::Pauli, std::move(els));
}

OperatorBasis OperatorBasis::target_adapted(std::span<const CVector> x, std::span<const CVector> y) {
    const int d = static_cast<int>(x.size());
    if (static_cast<int>(y.size()) != d) {
        throw DimensionError("target_adapted: families differ in size");
    }
    for (const auto *fam : {&x, &y}) {
        CMatrix g(d, d);
        for (int i = 0; i < d; ++i) {
            if ((*fam)[i].size() != d) {
                throw DimensionError("target_adapted: state dimension does not match family size");
            }
            for (int j = 0; j < d; ++j) {
                g(i, j) = (*fam)[i].dot((*fam)[j]);
            }
        }
        if ((g - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
            throw ParameterError("target_adapted: family is not an orthonormal basis");
        }
    }
    std::vector<CMatrix> els;
    for (int p = 0; p < d; ++p) {
        for (int q = 0; q < d; ++q) {
            els.push_back(dyad(y[q], x[p]));
        }
    }
    return OperatorBasis(d, Kind::TargetAdapted, std::move(els));
}

std::string OperatorBasis::tag() const {
    switch (kind_) {
        case Kind::Computational:
            return "computational";
        case Kind::Pauli:
            return "pauli";
        case Kind::TargetAdapted:
            return "adapted";
    }
    return "unknown";
}

ProcessMatrix kraus_to_chi(const KrausSet &k, const OperatorBasis &basis) {
    if (k.dim != basis.dim()) {
        throw DimensionError("kraus_to_chi: basis dimension does not match the Kraus operators");
    }
    const int n = basis.size();
    CMatrix chi = CMatrix::Zero(n, n);
    CVector a(n);
    for (const auto &op : k.operators) {
        for (int m = 0; m < n; ++m) {
            a(m) = (basis.element(m).adjoint() * op).trace();
        }
        chi += a * a.adjoint();
    }
    const TpMode mode = k.is_trace_preserving() ? TpMode::TracePreserving : TpMode::TraceNonIncreasing;
    return {basis, chi, mode};
}

ProcessMatrix change_basis(const ProcessMatrix &p, const OperatorBasis &to) {
    if (p.dim() != to.dim()) {
        throw DimensionError("change_basis: dimension mismatch");
    }
    const CMatrix &wf = p.basis.to_computational();
    const CMatrix &wt = to.to_computational();
    const CMatrix t = wt.adjoint() * wf;
    return {to, linalg::hermitian_part(t * p.chi * t.adjoint()), p.tp_mode};
}

ProcessMatrix to_computational(const ProcessMatrix &p) {
    if (p.basis.kind() == OperatorBasis::Kind::Computational) {
        return p;
    }
    return change_basis(p, OperatorBasis::computational(p.dim()));
}

CMatrix apply_process(const ProcessMatrix &p, const CMatrix &rho) {
    const int d = p.dim();
    require_square(rho, d, "apply_process");
    const int n = p.basis.size();
    CMatrix out = CMatrix::Zero(d, d);
    for (int m = 0; m < n; ++m) {
        const CMatrix left = p.basis.element(m) * rho;
        for (int k = 0; k < n; ++k) {
            if (p.chi(m, k) != cplx(0.0)) {
                out += p.chi(m, k) * left * p.basis.element(k).adjoint();
            }
        }
    }
    return out;
}

CMatrix choi_state(const ProcessMatrix &p) {
    return to_computational(p).chi / static_cast<double>(p.dim());
}

CMatrix choi_apply(const CMatrix &chi_comp, const CMatrix &rho) {
    const int d = static_cast<int>(rho.rows());
    require_square(rho, d, "choi_apply");
    require_square(chi_comp, d * d, "choi_apply");
    CMatrix out = CMatrix::Zero(d, d);
    for (int a = 0; a < d; ++a) {
        for (int c = 0; c < d; ++c) {
            out += rho(a, c) * chi_comp.block(a * d, c * d, d, d);
        }
    }
    return static_cast<double>(d) * out;
}

CMatrix completeness(const ProcessMatrix &p) {
    const int d = p.dim();
    const int n = p.basis.size();
    CMatrix out = CMatrix::Zero(d, d);
    for (int m = 0; m < n; ++m) {
        const CMatrix left = p.basis.element(m).adjoint();
        for (int k = 0; k < n; ++k) {
            if (p.chi(m, k) != cplx(0.0)) {
                out += p.chi(m, k) * left * p.basis.element(k);
            }
        }
    }
    return out;
}

double trace_condition_violation(const ProcessMatrix &p) {
    const CMatrix dev = completeness(p) - CMatrix::Identity(p.dim(), p.dim());
    if (p.tp_mode == TpMode::TracePreserving) {
        return dev.cwiseAbs().maxCoeff();
    }
    return std::max(0.0, linalg::max_eigenvalue(dev));
}

ProcessMatrix incoherent_part(const ProcessMatrix &p) {
    if (!p.basis.is_target_adapted()) {
        throw ParameterError("incoherent_part: process matrix is not in a target-adapted basis");
    }
    ProcessMatrix out = p;
    out.chi = p.chi.diagonal().real().cast<cplx>().asDiagonal();
    return out;
}

TpMode TargetOperation::default_tp_mode() const {
    return is_unitary() ? TpMode::TracePreserving : TpMode::TraceNonIncreasing;
}

TargetOperation make_target(std::string name, const CMatrix &kraus, std::vector<CVector> initial,
                            std::vector<int> fourier_factors) {
    const int d = static_cast<int>(kraus.rows());
    require_square(kraus, d, "make_target");
    const int n = qubit_count(d);
    const int k = static_cast<int>(initial.size());
    if (k == 0 || k > d) {
        throw ParameterError("make_target: invalid subspace dimension");
    }
    int prod = 1;
    for (int f : fourier_factors) {
        if (f < 1) {
            throw ParameterError("make_target: invalid Fourier factor");
        }
        prod *= f;
    }
    if (prod != k) {
        throw ParameterError("make_target: Fourier factors do not multiply to the subspace dimension");
    }
    const CMatrix sts = kraus.adjoint() * kraus;
    if ((sts * sts - sts).cwiseAbs().maxCoeff() > 1e-10) {
        throw ParameterError("make_target: S^dagger S is not a projector");
    }
    if (std::abs(sts.trace().real() - k) > 1e-9) {
        throw ParameterError("make_target: rank of S does not match the initial family");
    }
    std::vector<CVector> final_states;
    for (int i = 0; i < k; ++i) {
        if (initial[i].size() != d) {
            throw DimensionError("make_target: initial state has wrong dimension");
        }
        for (int j = 0; j < k; ++j) {
            const cplx g = initial[i].dot(initial[j]);
            if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-10) {
                throw ParameterError("make_target: initial family is not orthonormal");
            }
        }
        if ((sts * initial[i] - initial[i]).norm() > 1e-10) {
            throw ParameterError("make_target: initial state outside the support of S");
        }
        final_states.push_back(kraus * initial[i]);
    }
    return {std::move(name), n, kraus, k, std::move(initial), std::move(final_states), std::move(fourier_factors)};
}

namespace {

CVector basis_ket(int d, int i) {
    CVector v = CVector::Zero(d);
    v(i) = 1.0;
    return v;
}

}  // namespace

TargetOperation builtin_cnot() {
    CMatrix s = CMatrix::Zero(4, 4);
    s(0, 0) = s(1, 1) = 1.0;
    s(2, 3) = s(3, 2) = 1.0;
    std::vector<CVector> x;
    for (int i = 0; i < 4; ++i) {
        x.push_back(basis_ket(4, i));
    }
    return make_target("cnot", s, std::move(x), {2, 2});
}

TargetOperation builtin_fusion() {
    CMatrix s = CMatrix::Zero(4, 4);
    s(0, 0) = 1.0;
    s(3, 3) = 1.0;
    return make_target("fusion", s, {basis_ket(4, 0), basis_ket(4, 3)}, {2});
}

TargetOperation builtin_identity(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 3) {
        throw ParameterError("builtin_identity: unsupported qubit count");
    }
    const int d = 1 << n_qubits;
    std::vector<CVector> x;
    for (int i = 0; i < d; ++i) {
        x.push_back(basis_ket(d, i));
    }
    return make_target("identity" + std::to_string(n_qubits), CMatrix::Identity(d, d), std::move(x),
                       std::vector<int>(n_qubits, 2));
}

TargetOperation target_by_name(std::string_view name) {
    if (name == "cnot") {
        return builtin_cnot();
    }
    if (name == "fusion") {
        return builtin_fusion();
    }
    if (name == "identity1") {
        return builtin_identity(1);
    }
    if (name == "identity2") {
        return builtin_identity(2);
    }
    throw ParameterError("unknown target '" + std::string(name) + "'");
}

std::vector<CVector> extended_initial(const TargetOperation &t) {
    return complete_basis(t.initial, t.dim());
}

std::vector<CVector> extended_final(const TargetOperation &t) {
    return complete_basis(t.final_states, t.dim());
}

OperatorBasis adapted_basis(const TargetOperation &t) {
    const auto x = extended_initial(t);
    const auto y = extended_final(t);
    return OperatorBasis::target_adapted(x, y);
}

ProcessMatrix ideal_process(const TargetOperation &t) {
    KrausSet k{t.dim(), {t.kraus}};
    return kraus_to_chi(k, OperatorBasis::computational(t.dim()));
}

NoiseSpec NoiseSpec::parse(std::string_view text) {
    NoiseSpec spec;
    if (text.empty() || text == "none") {
        return spec;
    }
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t next = text.find('+', pos);
        if (next == std::string_view::npos) {
            next = text.size();
        }
        const std::string_view term = text.substr(pos, next - pos);
        const size_t colon = term.find(':');
        if (colon == std::string_view::npos) {
            throw ParameterError("noise term '" + std::string(term) + "' must look like kind:value");
        }
        const std::string_view kind = term.substr(0, colon);
        const std::string_view value = term.substr(colon + 1);
        double p = 0.0;
        const auto res = std::from_chars(value.data(), value.data() + value.size(), p);
        if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
            throw ParameterError("noise term '" + std::string(term) + "' has an invalid value");
        }
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ParameterError("noise parameter must lie in [0, 1]");
        }
        NoiseTerm::Kind k;
        if (kind == "depolarizing") {
            k = NoiseTerm::Kind::Depolarizing;
        } else if (kind == "dephasing") {
            k = NoiseTerm::Kind::Dephasing;
        } else if (kind == "amplitude_damping") {
            k = NoiseTerm::Kind::AmplitudeDamping;
        } else {
            throw ParameterError("unknown noise kind '" + std::string(kind) + "'");
        }
        spec.terms.push_back({k, p});
        pos = next + 1;
    }
    return spec;
}

std::string NoiseSpec::to_string() const {
    if (terms.empty()) {
        return "none";
    }
    std::string out;
    for (const auto &t : terms) {
        if (!out.empty()) {
            out += '+';
        }
        switch (t.kind) {
            case NoiseTerm::Kind::Depolarizing:
                out += "depolarizing:";
                break;
            case NoiseTerm::Kind::Dephasing:
                out += "dephasing:";
                break;
            case NoiseTerm::Kind::AmplitudeDamping:
                out += "amplitude_damping:";
                break;
        }
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, t.p);
        out.append(buf, res.ptr);
    }
    return out;
}

namespace {

KrausSet on_every_qubit(const std::vector<CMatrix> &single, int n_qubits) {
    std::vector<CMatrix> ops{CMatrix::Identity(1, 1)};
    for (int q = 0; q < n_qubits; ++q) {
        std::vector<CMatrix> next;
        for (const auto &a : ops) {
            for (const auto &s : single) {
                next.push_back(linalg::kron(a, s));
            }
        }
        ops = std::move(next);
    }
    return {1 << n_qubits, std::move(ops)};
}

}  // namespace

KrausSet noise_channel(const NoiseTerm &t, int n_qubits) {
    if (!(t.p >= 0.0 && t.p <= 1.0)) {
        throw ParameterError("noise parameter must lie in [0, 1]");
    }
    const int d = 1 << n_qubits;
    switch (t.kind) {
        case NoiseTerm::Kind::Depolarizing: {
            const double d2 = static_cast<double>(d) * d;
            KrausSet k{d, {}};
            for (const auto &s : pauli::all_strings(n_qubits)) {
                const bool id = pauli::weight(s) == 0;
                const double w = id ? 1.0 - t.p + t.p / d2 : t.p / d2;
                if (w > 0.0) {
                    k.operators.push_back(std::sqrt(w) * pauli::string_matrix(s));
                }
            }
            return k;
        }
        case NoiseTerm::Kind::Dephasing: {
            std::vector<CMatrix> single{std::sqrt(1.0 - t.p / 2) * pauli::matrix('I')};
            if (t.p > 0.0) {
                single.push_back(std::sqrt(t.p / 2) * pauli::matrix('Z'));
            }
            return on_every_qubit(single, n_qubits);
        }
        case NoiseTerm::Kind::AmplitudeDamping: {
            CMatrix k0 = CMatrix::Zero(2, 2);
            k0(0, 0) = 1.0;
            k0(1, 1) = std::sqrt(1.0 - t.p);
            std::vector<CMatrix> single{k0};
            if (t.p > 0.0) {
                CMatrix k1 = CMatrix::Zero(2, 2);
                k1(0, 1) = std::sqrt(t.p);
                single.push_back(k1);
            }
            return on_every_qubit(single, n_qubits);
        }
    }
    throw ParameterError("unknown noise kind");
}

KrausSet make_noisy(const TargetOperation &target, const NoiseSpec &noise) {
    KrausSet k{target.dim(), {target.kraus}};
    for (const auto &t : noise.terms) {
        k = compose(noise_channel(t, target.n_qubits), k);
    }
    return k;
}

KrausSet unitary_channel(const CMatrix &u) {
    const int d = static_cast<int>(u.rows());
    require_square(u, d, "unitary_channel");
    if ((u.adjoint() * u - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
        throw ParameterError("unitary_channel: matrix is not unitary");
    }
    return {d, {u}};
}

KrausSet identity_channel(int d) {
    return {d, {CMatrix::Identity(d, d)}};
}

CMatrix random_unitary(int d, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    CMatrix z(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            z(i, j) = cplx(g(rng), g(rng)) / std::sqrt(2.0);
        }
    }
    Eigen::HouseholderQR<CMatrix> qr(z);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    CMatrix ph = CMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double a = std::abs(r(i, i));
        ph(i, i) = a > 0 ? r(i, i) / a : cplx(1.0);
    }
    return q * ph;
}

KrausSet random_channel(int d, double p, std::mt19937_64 &rng) {
    const int n = qubit_count(d);
    return compose(noise_channel({NoiseTerm::Kind::Depolarizing, p}, n), unitary_channel(random_unitary(d, rng)));
}

KrausSet random_kraus_channel(int d, int rank, std::mt19937_64 &rng) {
    if (rank < 1) {
        throw ParameterError("random_kraus_channel: rank must be positive");
    }
    std::normal_distribution<double> g;
    std::vector<CMatrix> gs;
    CMatrix m = CMatrix::Zero(d, d);
    for (int r = 0; r < rank; ++r) {
        CMatrix a(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                a(i, j) = cplx(g(rng), g(rng));
            }
        }
        m += a.adjoint() * a;
        gs.push_back(std::move(a));
    }
    const auto e = linalg::eig_hermitian(linalg::hermitian_part(m), 1e-8);
    const RVector inv_sqrt = e.values.cwiseSqrt().cwiseInverse();
    const CMatrix msi = e.vectors * inv_sqrt.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    for (auto &a : gs) {
        a = a * msi;
    }
    return {d, std::move(gs)};
}

}  // namespace qdyn::channels
