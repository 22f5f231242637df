#include "qdyn/tomo.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "qdyn/linalg.hpp"
#include "qdyn/pauli.hpp"

namespace qdyn::tomo {

using channels::OperatorBasis;
using channels::ProcessMatrix;
using channels::TpMode;

namespace {

double frequency(const Dataset &data, const Record &r, int o) {
    return data.exact ? r.counts[o] : r.counts[o] / static_cast<double>(data.shots);
}

std::vector<double> multinomial(long shots, const std::vector<double> &probs, std::mt19937_64 &rng) {
    std::vector<double> out(probs.size(), 0.0);
    double mass = 0.0;
    for (double p : probs) {
        mass += p;
    }
    long left = shots;
    for (size_t i = 0; i + 1 < probs.size() && left > 0; ++i) {
        const double q = mass > 0.0 ? std::clamp(probs[i] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<long> bin(left, q);
        const long c = bin(rng);
        out[i] = static_cast<double>(c);
        left -= c;
        mass -= probs[i];
    }
    out.back() += static_cast<double>(left);
    return out;
}

CMatrix pinv_checked(const CMatrix &m, const char *what) {
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(m);
    cod.setThreshold(1e-10);
    if (cod.rank() < std::min(m.rows(), m.cols())) {
        throw ParameterError(std::string(what) + ": operators do not span the required space");
    }
    return cod.pseudoInverse();
}

struct DyadTerm {
    char basis;
    int bit;
    cplx coeff;
};

// |i><j| on one qubit as a combination of Pauli eigenstate projectors.
std::vector<DyadTerm> qubit_dyad(int i, int j) {
    if (i == j) {
        return {{'Z', i, 1.0}};
    }
    const cplx s = i == 0 ? kI : -kI;
    const cplx c = -(1.0 + s) / 2.0;
    return {{'X', 0, 1.0}, {'Y', 0, s}, {'Z', 0, c}, {'Z', 1, c}};
}

}  // namespace

Dataset simulate_counts(const ProcessMatrix &process, std::span<const bases::PauliSetting> settings, long shots,
                        std::uint64_t seed, bool exact) {
    if (!exact && shots < 1) {
        throw ParameterError("simulate_counts: shots must be at least 1");
    }
    const int d = process.dim();
    int n = 0;
    while ((1 << n) < d) {
        ++n;
    }
    const CMatrix choi = channels::choi_state(process);
    Dataset data{n, exact ? 0 : shots, exact, {}};
    for (size_t idx = 0; idx < settings.size(); ++idx) {
        const auto &st = settings[idx];
        if (static_cast<int>(st.prep.size()) != n || static_cast<int>(st.meas.size()) != n) {
            throw DimensionError("simulate_counts: setting string length does not match the qubit count");
        }
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(idx)};
        std::mt19937_64 rng(seq);
        std::vector<CVector> meas_states;
        for (int o = 0; o < d; ++o) {
            meas_states.push_back(pauli::eigenstate(st.meas, o));
        }
        for (int a = 0; a < d; ++a) {
            const CMatrix out = channels::choi_apply(choi, linalg::projector(pauli::eigenstate(st.prep, a)));
            std::vector<double> probs(d + 1);
            double total = 0.0;
            for (int o = 0; o < d; ++o) {
                probs[o] = std::max(0.0, meas_states[o].dot(out * meas_states[o]).real());
                total += probs[o];
            }
            probs[d] = std::max(0.0, 1.0 - total);
            Record r{st.prep, a, st.meas, {}, 0.0};
            if (exact) {
                r.counts.assign(probs.begin(), probs.end() - 1);
                r.lost = probs[d];
            } else {
                auto c = multinomial(shots, probs, rng);
                r.lost = c.back();
                c.pop_back();
                r.counts = std::move(c);
            }
            data.records.push_back(std::move(r));
        }
    }
    return data;
}

namespace {

CMatrix estimate_from(const Dataset &data, const std::vector<const Record *> &recs) {
    const int n = data.n_qubits;
    const int d = 1 << n;
    CMatrix rho = CMatrix::Zero(d, d);
    for (const auto &s : pauli::all_strings(n)) {
        double sum = 0.0;
        int used = 0;
        for (const Record *r : recs) {
            if (!pauli::covered_by(s, r->meas)) {
                continue;
            }
            double e = 0.0;
            for (int o = 0; o < d; ++o) {
                e += pauli::outcome_sign(s, o) * frequency(data, *r, o);
            }
            sum += e;
            ++used;
        }
        if (used == 0) {
            throw ParameterError("estimate_output: no measurement setting covers Pauli string " + s);
        }
        rho += (sum / used / d) * pauli::string_matrix(s);
    }
    return rho;
}

}  // namespace

CMatrix estimate_output(const Dataset &data, const std::string &prep, int input) {
    std::vector<const Record *> recs;
    for (const auto &r : data.records) {
        if (r.prep == prep && r.input == input) {
            recs.push_back(&r);
        }
    }
    if (recs.empty()) {
        throw ParameterError("estimate_output: no records for preparation " + prep);
    }
    return estimate_from(data, recs);
}

CVector InversionKernel::expand(const CMatrix &op) const {
    const Eigen::Map<const CVector> v(op.data(), op.size());
    return expand_map * v;
}

std::vector<CMatrix> dyad_basis(int d) {
    std::vector<CMatrix> out;
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            CMatrix e = CMatrix::Zero(d, d);
            e(m, n) = 1.0;
            out.push_back(std::move(e));
        }
    }
    return out;
}

InversionKernel build_inversion_kernel(const OperatorBasis &basis, std::vector<CMatrix> rho_basis) {
    const int d = basis.dim();
    const int nb = basis.size();
    if (static_cast<int>(rho_basis.size()) != nb) {
        throw DimensionError("build_inversion_kernel: need d^2 input operators");
    }
    CMatrix r(d * d, nb);
    for (int k = 0; k < nb; ++k) {
        if (rho_basis[k].rows() != d || rho_basis[k].cols() != d) {
            throw DimensionError("build_inversion_kernel: input operator has wrong dimension");
        }
        r.col(k) = Eigen::Map<const CVector>(rho_basis[k].data(), d * d);
    }
    InversionKernel ker;
    ker.dim = d;
    ker.basis = basis;
    ker.rho_basis = std::move(rho_basis);
    ker.expand_map = pinv_checked(r, "build_inversion_kernel");
    const int big = nb * nb;
    ker.b.resize(big, big);
    for (int m = 0; m < nb; ++m) {
        for (int n = 0; n < nb; ++n) {
            const CMatrix en = basis.element(n).adjoint();
            for (int j = 0; j < nb; ++j) {
                const CVector c = ker.expand(basis.element(m) * ker.rho_basis[j] * en);
                ker.b.row(m * nb + n).segment(j * nb, nb) = c.transpose();
            }
        }
    }
    ker.k = pinv_checked(ker.b.transpose(), "build_inversion_kernel");
    return ker;
}

InversionKernel build_inversion_kernel(const OperatorBasis &basis) {
    return build_inversion_kernel(basis, dyad_basis(basis.dim()));
}

CVector lambda_from_outputs(const InversionKernel &kernel, std::span<const CMatrix> outputs) {
    const int nb = static_cast<int>(kernel.rho_basis.size());
    if (static_cast<int>(outputs.size()) != nb) {
        throw DimensionError("lambda_from_outputs: need one output per input operator");
    }
    CVector lambda(nb * nb);
    for (int j = 0; j < nb; ++j) {
        lambda.segment(j * nb, nb) = kernel.expand(outputs[j]);
    }
    return lambda;
}

CVector lambda_from_process(const InversionKernel &kernel, const ProcessMatrix &p) {
    std::vector<CMatrix> outs;
    for (const auto &rho : kernel.rho_basis) {
        outs.push_back(channels::apply_process(p, rho));
    }
    return lambda_from_outputs(kernel, outs);
}

CMatrix chi_from_lambda(const InversionKernel &kernel, const CVector &lambda) {
    const int nb = static_cast<int>(kernel.rho_basis.size());
    const CVector v = kernel.k * lambda;
    CMatrix chi(nb, nb);
    for (int m = 0; m < nb; ++m) {
        for (int n = 0; n < nb; ++n) {
            chi(m, n) = v(m * nb + n);
        }
    }
    return linalg::hermitian_part(chi);
}

std::vector<CMatrix> dyad_outputs(const Dataset &data) {
    const int n = data.n_qubits;
    const int d = 1 << n;
    std::map<std::pair<std::string, int>, std::vector<const Record *>> by_input;
    for (const auto &r : data.records) {
        by_input[{r.prep, r.input}].push_back(&r);
    }
    std::map<std::pair<std::string, int>, CMatrix> cache;
    auto output = [&](const std::string &prep, int input) -> const CMatrix & {
        auto it = cache.find({prep, input});
        if (it != cache.end()) {
            return it->second;
        }
        auto rec = by_input.find({prep, input});
        if (rec == by_input.end()) {
            throw ParameterError("dyad_outputs: missing preparation " + prep + " input " + std::to_string(input));
        }
        return cache.emplace(std::make_pair(prep, input), estimate_from(data, rec->second)).first->second;
    };
    std::vector<CMatrix> outs;
    for (int m = 0; m < d; ++m) {
        for (int k = 0; k < d; ++k) {
            // expand |m><k| qubit by qubit
            std::vector<std::pair<std::pair<std::string, int>, cplx>> terms{{{"", 0}, 1.0}};
            for (int q = 0; q < n; ++q) {
                const int i = (m >> (n - 1 - q)) & 1;
                const int j = (k >> (n - 1 - q)) & 1;
                std::vector<std::pair<std::pair<std::string, int>, cplx>> next;
                for (const auto &[key, c] : terms) {
                    for (const auto &t : qubit_dyad(i, j)) {
                        next.push_back({{key.first + t.basis, key.second * 2 + t.bit}, c * t.coeff});
                    }
                }
                terms = std::move(next);
            }
            CMatrix acc = CMatrix::Zero(d, d);
            for (const auto &[key, c] : terms) {
                acc += c * output(key.first, key.second);
            }
            outs.push_back(std::move(acc));
        }
    }
    return outs;
}

namespace {

CMatrix project_trace_condition(const CMatrix &chi, int d, TpMode mode) {
    const CMatrix red = linalg::partial_trace(chi, {d, d}, linalg::Subsystem::Second);
    CMatrix excess;
    if (mode == TpMode::TracePreserving) {
        excess = red - CMatrix::Identity(d, d);
    } else {
        const auto e = linalg::eig_hermitian(linalg::hermitian_part(red), 1e-8);
        const RVector over = (e.values.array() - 1.0).cwiseMax(0.0);
        excess = e.vectors * over.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    }
    return chi - linalg::kron(excess, CMatrix::Identity(d, d)) / static_cast<double>(d);
}

}  // namespace

PhysicalizeResult physicalize(const ProcessMatrix &raw, PhysicalizeOptions opt) {
    if (!linalg::is_hermitian(raw.chi, 1e-8)) {
        throw NotHermitianError("physicalize: chi is not Hermitian");
    }
    const int d = raw.dim();
    const CMatrix start = channels::to_computational(raw).chi;
    CMatrix x = start;
    CMatrix p = CMatrix::Zero(x.rows(), x.cols());
    CMatrix q = p;
    PhysicalizeResult res;
    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        const CMatrix y = linalg::project_psd(x + p);
        p = x + p - y;
        const CMatrix xn = project_trace_condition(y + q, d, raw.tp_mode);
        q = y + q - xn;
        const double step = (xn - x).norm();
        const double gap = (xn - y).norm();
        x = xn;
        res.sweeps = sweep;
        if (step <= opt.tol && gap <= opt.tol) {
            res.converged = true;
            break;
        }
    }
    ProcessMatrix comp{OperatorBasis::computational(d), linalg::hermitian_part(x), raw.tp_mode};
    res.distance = (comp.chi - start).norm();
    res.process = raw.basis.kind() == OperatorBasis::Kind::Computational ? comp : channels::change_basis(comp, raw.basis);
    return res;
}

Reconstruction reconstruct_chi(const Dataset &data, const InversionKernel &kernel, TpMode tp_mode) {
    const int n = data.n_qubits;
    if (kernel.dim != (1 << n)) {
        throw DimensionError("reconstruct_chi: kernel dimension does not match the dataset");
    }
    std::set<std::pair<std::string, std::string>> have;
    for (const auto &r : data.records) {
        have.insert({r.prep, r.meas});
    }
    for (const auto &p : pauli::measurement_strings(n)) {
        for (const auto &m : pauli::measurement_strings(n)) {
            if (!have.count({p, m})) {
                throw ParameterError("reconstruct_chi: dataset lacks setting (" + p + ", " + m + ")");
            }
        }
    }
    const auto dyad_outs = dyad_outputs(data);
    // the kernel may use another input family; re-express outputs on it
    std::vector<CMatrix> mapped;
    const auto dyads = dyad_basis(kernel.dim);
    for (const auto &rho : kernel.rho_basis) {
        CMatrix acc = CMatrix::Zero(kernel.dim, kernel.dim);
        for (size_t j = 0; j < dyads.size(); ++j) {
            const cplx c = rho(static_cast<int>(j) / kernel.dim, static_cast<int>(j) % kernel.dim);
            if (c != cplx(0.0)) {
                acc += c * dyad_outs[j];
            }
        }
        mapped.push_back(std::move(acc));
    }
    const CVector lambda = lambda_from_outputs(kernel, mapped);
    ProcessMatrix linear{kernel.basis, chi_from_lambda(kernel, lambda), tp_mode};
    Reconstruction rec{linear, physicalize(linear, {}), 0};
    if (!data.exact && tp_mode == TpMode::TracePreserving) {
        auto mle = maximum_likelihood(data, rec.physical.process);
        rec.mle_iterations = mle.iterations;
        rec.physical.process = kernel.basis.kind() == OperatorBasis::Kind::Computational
                                   ? mle.process
                                   : channels::change_basis(mle.process, kernel.basis);
        rec.physical.distance = (mle.process.chi - channels::to_computational(linear).chi).norm();
    }
    return rec;
}

namespace {

CMatrix inverse_sqrt(const CMatrix &m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    const RVector v = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * v.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

MleResult maximum_likelihood(const Dataset &data, const ProcessMatrix &start, MleOptions opt) {
    const int d = 1 << data.n_qubits;
    if (start.dim() != d) {
        throw DimensionError("maximum_likelihood: start does not match the dataset");
    }
    // p_j = Tr(M_j chi) with M_j = rho^T (x) Pi
    std::vector<CMatrix> ops;
    std::vector<double> counts;
    for (const auto &r : data.records) {
        const CMatrix rho_t = linalg::projector(pauli::eigenstate(r.prep, r.input)).transpose();
        for (int o = 0; o < d; ++o) {
            if (r.counts[o] > 0.0) {
                ops.push_back(linalg::kron(rho_t, linalg::projector(pauli::eigenstate(r.meas, o))));
                counts.push_back(r.counts[o]);
            }
        }
    }
    CMatrix chi = (1.0 - opt.mix) * channels::to_computational(start).chi +
                  opt.mix * CMatrix::Identity(d * d, d * d) / static_cast<double>(d);
    auto likelihood = [&](const CMatrix &c, CMatrix *r) {
        double ll = 0.0;
        if (r != nullptr) {
            r->setZero(d * d, d * d);
        }
        for (size_t j = 0; j < ops.size(); ++j) {
            const double p = std::max((ops[j].cwiseProduct(c.transpose())).sum().real(), 1e-300);
            ll += counts[j] * std::log(p);
            if (r != nullptr) {
                *r += (counts[j] / p) * ops[j];
            }
        }
        return ll;
    };
    MleResult res;
    CMatrix r;
    double ll = likelihood(chi, &r);
    for (int it = 1; it <= opt.max_iter; ++it) {
        const CMatrix rcr = r * chi * r;
        const CMatrix lam = inverse_sqrt(linalg::partial_trace(rcr, {d, d}, linalg::Subsystem::Second));
        const CMatrix norm = linalg::kron(lam, CMatrix::Identity(d, d));
        chi = linalg::hermitian_part(norm * rcr * norm);
        const double next = likelihood(chi, &r);
        res.iterations = it;
        const bool done = next - ll < opt.tol * std::abs(ll);
        ll = next;
        if (done) {
            break;
        }
    }
    res.process = {OperatorBasis::computational(d), chi, TpMode::TracePreserving};
    res.log_likelihood = ll;
    return res;
}

}  // namespace qdyn::tomo
