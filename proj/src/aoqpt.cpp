#include "qdyn/aoqpt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "qdyn/linalg.hpp"
#include "qdyn/pauli.hpp"

namespace qdyn::aoqpt {

using bases::BasisFamily;
using channels::ProcessMatrix;
using channels::TpMode;

const char *to_string(Setting s) {
    return s == Setting::XY ? "xy" : "uv";
}

Setting setting_from_string(std::string_view s) {
    if (s == "xy") {
        return Setting::XY;
    }
    if (s == "uv") {
        return Setting::UV;
    }
    throw ParameterError("unknown setting '" + std::string(s) + "' (expected xy or uv)");
}

TransitionMatrix transition_from_process(const ProcessMatrix &p, const BasisFamily &prep, const BasisFamily &meas,
                                         Setting setting) {
    if (prep.dim != p.dim() || meas.dim != p.dim()) {
        throw DimensionError("transition_from_process: basis states do not live in the process space");
    }
    if (prep.size() != meas.size()) {
        throw DimensionError("transition_from_process: families differ in size");
    }
    const int k = prep.size();
    const CMatrix choi = channels::choi_state(p);
    TransitionMatrix out{setting, k, RMatrix(k, k)};
    for (int m = 0; m < k; ++m) {
        const CMatrix rho = channels::choi_apply(choi, linalg::projector(prep.states[m]));
        for (int n = 0; n < k; ++n) {
            out.t(m, n) = meas.states[n].dot(rho * meas.states[n]).real();
        }
    }
    return out;
}

TransitionPair transitions_from_process(const ProcessMatrix &p, const channels::TargetOperation &t) {
    const auto f = bases::aoqpt_families(t);
    return {transition_from_process(p, f.x, f.y, Setting::XY), transition_from_process(p, f.u, f.v, Setting::UV)};
}

CMatrix fourier_coefficients(const bases::AoqptFamilies &f) {
    const int k = f.x.size();
    CMatrix u(k, k);
    for (int p = 0; p < k; ++p) {
        for (int m = 0; m < k; ++m) {
            u(p, m) = f.x.states[p].dot(f.u.states[m]);
        }
    }
    return u;
}

RMatrix fourier_double_sum(const CMatrix &chi, const CMatrix &u, int d) {
    const int k = static_cast<int>(u.rows());
    RMatrix t(k, k);
    for (int m = 0; m < k; ++m) {
        for (int n = 0; n < k; ++n) {
            cplx acc = 0.0;
            for (int p = 0; p < k; ++p) {
                for (int q = 0; q < k; ++q) {
                    const cplx left = std::conj(u(q, n)) * u(p, m);
                    for (int r = 0; r < k; ++r) {
                        for (int s = 0; s < k; ++s) {
                            acc += chi(p * d + q, r * d + s) * left * std::conj(u(r, m)) * u(s, n);
                        }
                    }
                }
            }
            t(m, n) = acc.real();
        }
    }
    return t;
}

ChiIdentityReport verify_chi_identity(const ProcessMatrix &p, const channels::TargetOperation &t) {
    const auto f = bases::aoqpt_families(t);
    const int d = t.dim();
    const CMatrix u = fourier_coefficients(f);
    const ProcessMatrix adapted = channels::change_basis(p, channels::adapted_basis(t));
    const auto txy = transition_from_process(p, f.x, f.y, Setting::XY);
    const auto tuv = transition_from_process(p, f.u, f.v, Setting::UV);
    ChiIdentityReport rep;
    for (int m = 0; m < t.k; ++m) {
        for (int n = 0; n < t.k; ++n) {
            rep.xy_error = std::max(rep.xy_error, std::abs(txy.t(m, n) - adapted.chi(m * d + n, m * d + n).real()));
        }
    }
    rep.uv_error = (tuv.t - fourier_double_sum(adapted.chi, u, d)).cwiseAbs().maxCoeff();
    return rep;
}

namespace {

RVector project_simplex(const RVector &v) {
    RVector u = v;
    std::sort(u.data(), u.data() + u.size(), std::greater<double>());
    double cum = 0.0;
    double theta = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        cum += u(j);
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u(j) - t > 0.0) {
            theta = t;
        }
    }
    return (v.array() - theta).cwiseMax(0.0);
}

}  // namespace

TransitionMatrix project_transition(const RMatrix &raw, Setting setting, TpMode mode) {
    if (raw.rows() != raw.cols()) {
        throw DimensionError("project_transition: matrix is not square");
    }
    const int k = static_cast<int>(raw.rows());
    TransitionMatrix out{setting, k, RMatrix(k, k)};
    for (int m = 0; m < k; ++m) {
        const RVector row = raw.row(m).transpose();
        if (row.cwiseAbs().maxCoeff() == 0.0) {
            throw ParameterError("project_transition: row " + std::to_string(m) + " has no data");
        }
        RVector p;
        if (mode == TpMode::TracePreserving) {
            p = project_simplex(row);
        } else {
            p = row.cwiseMax(0.0);
            if (p.sum() > 1.0) {
                p = project_simplex(row);
            }
        }
        out.t.row(m) = p.transpose();
    }
    return out;
}

double projector_probability(const std::vector<bases::PauliTerm> &decomposition,
                             const std::map<std::string, double> &expectations) {
    double acc = 0.0;
    for (const auto &t : decomposition) {
        auto it = expectations.find(t.pauli);
        double e;
        if (it != expectations.end()) {
            e = it->second;
        } else if (pauli::weight(t.pauli) == 0) {
            e = 1.0;
        } else {
            throw ParameterError("projector_probability: missing expectation of " + t.pauli);
        }
        acc += t.coeff * e;
    }
    return acc;
}

RMatrix raw_transition_from_dataset(const tomo::Dataset &data, const BasisFamily &prep, const BasisFamily &meas) {
    const int n = data.n_qubits;
    const int d = 1 << n;
    if (prep.dim != d || meas.dim != d || prep.size() != meas.size()) {
        throw DimensionError("raw_transition_from_dataset: families do not match the dataset");
    }
    std::map<std::pair<std::string, std::string>, std::vector<const tomo::Record *>> groups;
    for (const auto &r : data.records) {
        auto &g = groups[{r.prep, r.meas}];
        if (g.empty()) {
            g.assign(d, nullptr);
        }
        g.at(r.input) = &r;
    }
    auto freq = [&](const tomo::Record &r, int o) {
        return data.exact ? r.counts[o] : r.counts[o] / static_cast<double>(data.shots);
    };
    std::map<std::pair<std::string, std::string>, double> cache;
    auto correlator = [&](const std::string &p, const std::string &q) {
        auto it = cache.find({p, q});
        if (it != cache.end()) {
            return it->second;
        }
        double sum = 0.0;
        int used = 0;
        for (const auto &[key, recs] : groups) {
            if (!pauli::covered_by(p, key.first) || !pauli::covered_by(q, key.second)) {
                continue;
            }
            if (std::find(recs.begin(), recs.end(), nullptr) != recs.end()) {
                continue;
            }
            double e = 0.0;
            for (int s = 0; s < d; ++s) {
                const int sp = pauli::outcome_sign(p, s);
                for (int o = 0; o < d; ++o) {
                    e += sp * pauli::outcome_sign(q, o) * freq(*recs[s], o);
                }
            }
            sum += e;
            ++used;
        }
        if (used == 0) {
            throw ParameterError("transition_from_dataset: no setting covers (" + p + ", " + q + ")");
        }
        const double v = sum / used;
        cache.emplace(std::make_pair(p, q), v);
        return v;
    };
    const int k = prep.size();
    RMatrix raw(k, k);
    for (int m = 0; m < k; ++m) {
        const auto dp = bases::pauli_decompose(linalg::projector(prep.states[m]));
        for (int j = 0; j < k; ++j) {
            const auto dq = bases::pauli_decompose(linalg::projector(meas.states[j]));
            double acc = 0.0;
            for (const auto &tp : dp) {
                for (const auto &tq : dq) {
                    acc += tp.coeff * tq.coeff * correlator(tp.pauli, tq.pauli);
                }
            }
            raw(m, j) = acc;
        }
    }
    return raw;
}

TransitionMatrix transition_from_dataset(const tomo::Dataset &data, const BasisFamily &prep, const BasisFamily &meas,
                                         Setting setting, TpMode mode) {
    return project_transition(raw_transition_from_dataset(data, prep, meas), setting, mode);
}

FeasibleSetSpec build_feasible_set(const TransitionMatrix &xy, const TransitionMatrix &uv,
                                   const channels::TargetOperation &target, TpMode tp_mode) {
    if (xy.k != uv.k || xy.k != target.k || xy.t.rows() != xy.k || uv.t.rows() != uv.k) {
        throw DimensionError("build_feasible_set: transition matrices do not match the target subspace");
    }
    const auto f = bases::aoqpt_families(target);
    FeasibleSetSpec spec{target, tp_mode, {}, xy, uv};
    const std::pair<const TransitionMatrix *, std::pair<const BasisFamily *, const BasisFamily *>> parts[] = {
        {&xy, {&f.x, &f.y}}, {&uv, {&f.u, &f.v}}};
    for (const auto &[tm, fam] : parts) {
        for (int m = 0; m < target.k; ++m) {
            const CMatrix rt = linalg::projector(fam.first->states[m]).transpose();
            for (int n = 0; n < target.k; ++n) {
                spec.constraints.push_back(
                    {tm->setting, m, n, linalg::kron(rt, linalg::projector(fam.second->states[n])), tm->t(m, n)});
            }
        }
    }
    return spec;
}

FeasibilityReport check_feasible(const FeasibleSetSpec &spec, const ProcessMatrix &p) {
    const ProcessMatrix comp = channels::to_computational(p);
    FeasibilityReport r;
    for (const auto &c : spec.constraints) {
        r.max_data_residual = std::max(r.max_data_residual, std::abs((c.weight * comp.chi).trace().real() - c.value));
    }
    r.min_eigenvalue = linalg::min_eigenvalue(comp.chi);
    ProcessMatrix mode = comp;
    mode.tp_mode = spec.tp_mode;
    r.trace_violation = channels::trace_condition_violation(mode);
    return r;
}

}  // namespace qdyn::aoqpt
