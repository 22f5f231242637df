#include "qdyn/bases.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qdyn/linalg.hpp"
#include "qdyn/pauli.hpp"

namespace qdyn::bases {

const char *to_string(Label l) {
    switch (l) {
        case Label::X:
            return "x";
        case Label::Y:
            return "y";
        case Label::U:
            return "u";
        case Label::V:
            return "v";
    }
    return "?";
}

const char *to_string(Scheme s) {
    return s == Scheme::Sqpt ? "sqpt" : "aoqpt";
}

BasisFamily computational_basis(int d, Label label) {
    BasisFamily f{label, d, {}};
    for (int i = 0; i < d; ++i) {
        CVector v = CVector::Zero(d);
        v(i) = 1.0;
        f.states.push_back(std::move(v));
    }
    return f;
}

void fix_phases(BasisFamily &f) {
    for (auto &v : f.states) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double a = std::abs(v(i));
            if (a > 1e-12) {
                v *= std::conj(v(i)) / a;
                v(i) = a;
                break;
            }
        }
    }
}

BasisFamily fourier_basis(const BasisFamily &base, Label label) {
    const int k = base.size();
    return complementary_basis(base, std::span<const int>(&k, 1), label);
}

BasisFamily complementary_basis(const BasisFamily &base, std::span<const int> factor_dims, Label label) {
    const int k = base.size();
    int prod = 1;
    for (int f : factor_dims) {
        prod *= f;
    }
    if (prod != k || k == 0) {
        throw DimensionError("complementary_basis: factor dimensions do not multiply to the family size");
    }
    const int r = static_cast<int>(factor_dims.size());
    auto digits = [&](int idx) {
        std::vector<int> out(r);
        for (int i = r - 1; i >= 0; --i) {
            out[i] = idx % factor_dims[i];
            idx /= factor_dims[i];
        }
        return out;
    };
    BasisFamily out{label, base.dim, {}};
    for (int m = 0; m < k; ++m) {
        const auto md = digits(m);
        CVector v = CVector::Zero(base.dim);
        for (int j = 0; j < k; ++j) {
            const auto jd = digits(j);
            double phase = 0.0;
            for (int i = 0; i < r; ++i) {
                phase -= 2.0 * std::numbers::pi * jd[i] * md[i] / factor_dims[i];
            }
            v += std::polar(1.0 / std::sqrt(static_cast<double>(k)), phase) * base.states[j];
        }
        out.states.push_back(std::move(v));
    }
    fix_phases(out);
    return out;
}

BasisFamily image_family(const CMatrix &s, const BasisFamily &in, Label label) {
    if (s.cols() != in.dim) {
        throw DimensionError("image_family: operator does not act on the family's space");
    }
    BasisFamily out{label, static_cast<int>(s.rows()), {}};
    for (const auto &v : in.states) {
        out.states.push_back(s * v);
    }
    fix_phases(out);
    return out;
}

double gram_deviation(const BasisFamily &f) {
    double worst = 0.0;
    for (int i = 0; i < f.size(); ++i) {
        for (int j = 0; j < f.size(); ++j) {
            worst = std::max(worst, std::abs(f.states[i].dot(f.states[j]) - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

double unbiasedness_deviation(const BasisFamily &a, const BasisFamily &b) {
    if (a.size() != b.size()) {
        throw DimensionError("unbiasedness_deviation: families differ in size");
    }
    const double target = 1.0 / a.size();
    double worst = 0.0;
    for (const auto &x : a.states) {
        for (const auto &y : b.states) {
            worst = std::max(worst, std::abs(std::norm(x.dot(y)) - target));
        }
    }
    return worst;
}

AoqptFamilies aoqpt_families(const channels::TargetOperation &t) {
    BasisFamily x{Label::X, t.dim(), t.initial};
    BasisFamily u = complementary_basis(x, t.fourier_factors, Label::U);
    BasisFamily y = image_family(t.kraus, x, Label::Y);
    BasisFamily v = image_family(t.kraus, u, Label::V);
    return {std::move(x), std::move(y), std::move(u), std::move(v)};
}

std::vector<PauliTerm> pauli_decompose(const CMatrix &m) {
    if (!linalg::is_hermitian(m)) {
        throw NotHermitianError("pauli_decompose: input is not Hermitian");
    }
    const int d = static_cast<int>(m.rows());
    int n = 0;
    while ((1 << n) < d) {
        ++n;
    }
    if ((1 << n) != d || n == 0) {
        throw DimensionError("pauli_decompose: dimension is not a power of two");
    }
    std::vector<PauliTerm> out;
    for (const auto &s : pauli::all_strings(n)) {
        const double c = (pauli::string_matrix(s) * m).trace().real() / d;
        if (std::abs(c) > 1e-14) {
            out.push_back({s, c});
        }
    }
    return out;
}

CMatrix pauli_reconstruct(const std::vector<PauliTerm> &terms, int n_qubits) {
    const int d = 1 << n_qubits;
    CMatrix out = CMatrix::Zero(d, d);
    for (const auto &t : terms) {
        out += t.coeff * pauli::string_matrix(t.pauli);
    }
    return out;
}

std::vector<std::string> family_settings(const BasisFamily &f, int n_qubits) {
    std::vector<std::string> strings;
    for (const auto &v : f.states) {
        for (const auto &t : pauli_decompose(linalg::projector(v))) {
            if (pauli::weight(t.pauli) > 0 &&
                std::find(strings.begin(), strings.end(), t.pauli) == strings.end()) {
                strings.push_back(t.pauli);
            }
        }
    }
    std::stable_sort(strings.begin(), strings.end(), [](const std::string &a, const std::string &b) {
        const int wa = pauli::weight(a);
        const int wb = pauli::weight(b);
        return wa != wb ? wa > wb : a < b;
    });
    std::vector<std::string> settings;
    for (const auto &s : strings) {
        bool merged = false;
        for (auto &set : settings) {
            bool ok = true;
            for (int q = 0; q < n_qubits; ++q) {
                if (s[q] != 'I' && set[q] != 'I' && s[q] != set[q]) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                for (int q = 0; q < n_qubits; ++q) {
                    if (set[q] == 'I') {
                        set[q] = s[q];
                    }
                }
                merged = true;
                break;
            }
        }
        if (!merged) {
            settings.push_back(s);
        }
    }
    if (settings.empty()) {
        settings.emplace_back(n_qubits, 'Z');
    }
    for (auto &set : settings) {
        std::replace(set.begin(), set.end(), 'I', 'Z');
    }
    return settings;
}

SettingsPlan plan_settings(const channels::TargetOperation &t, Scheme scheme) {
    SettingsPlan plan{t.n_qubits, scheme, {}};
    if (scheme == Scheme::Sqpt) {
        const auto strings = pauli::measurement_strings(t.n_qubits);
        for (const auto &p : strings) {
            for (const auto &m : strings) {
                plan.settings.push_back({p, m, 0});
            }
        }
        return plan;
    }
    const AoqptFamilies f = aoqpt_families(t);
    const std::pair<const BasisFamily *, const BasisFamily *> natives[] = {{&f.x, &f.y}, {&f.u, &f.v}};
    for (int n = 0; n < 2; ++n) {
        const auto preps = family_settings(*natives[n].first, t.n_qubits);
        const auto meas = family_settings(*natives[n].second, t.n_qubits);
        for (const auto &p : preps) {
            for (const auto &m : meas) {
                plan.settings.push_back({p, m, n});
            }
        }
    }
    return plan;
}

}  // namespace qdyn::bases
