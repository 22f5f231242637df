#include "qdyn/pauli.hpp"

#include <cmath>

#include "qdyn/linalg.hpp"

namespace qdyn::pauli {

CMatrix matrix(char p) {
    CMatrix m = CMatrix::Zero(2, 2);
    switch (p) {
        case 'I':
            m(0, 0) = m(1, 1) = 1.0;
            break;
        case 'X':
            m(0, 1) = m(1, 0) = 1.0;
            break;
        case 'Y':
            m(0, 1) = cplx(0, -1);
            m(1, 0) = cplx(0, 1);
            break;
        case 'Z':
            m(0, 0) = 1.0;
            m(1, 1) = -1.0;
            break;
        default:
            throw ParameterError(std::string("unknown Pauli label '") + p + "'");
    }
    return m;
}

void check_string(std::string_view s) {
    if (s.empty()) {
        throw ParameterError("empty Pauli string");
    }
    for (char c : s) {
        matrix(c);
    }
}

CMatrix string_matrix(std::string_view s) {
    check_string(s);
    CMatrix out = CMatrix::Identity(1, 1);
    for (char c : s) {
        out = linalg::kron(out, matrix(c));
    }
    return out;
}

namespace {

std::vector<std::string> strings_over(std::string_view alphabet, int n) {
    std::vector<std::string> out{""};
    for (int q = 0; q < n; ++q) {
        std::vector<std::string> next;
        next.reserve(out.size() * alphabet.size());
        for (const auto &s : out) {
            for (char c : alphabet) {
                next.push_back(s + c);
            }
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace

std::vector<std::string> all_strings(int n) {
    return strings_over("IXYZ", n);
}

std::vector<std::string> measurement_strings(int n) {
    return strings_over("XYZ", n);
}

int outcome_sign(std::string_view s, int a) {
    const int n = static_cast<int>(s.size());
    int sign = 1;
    for (int q = 0; q < n; ++q) {
        const int bit = (a >> (n - 1 - q)) & 1;
        if (s[q] != 'I' && bit) {
            sign = -sign;
        }
    }
    return sign;
}

CVector eigenstate(std::string_view s, int a) {
    check_string(s);
    const int n = static_cast<int>(s.size());
    const double h = 1.0 / std::sqrt(2.0);
    CVector out = CVector::Ones(1);
    for (int q = 0; q < n; ++q) {
        const int bit = (a >> (n - 1 - q)) & 1;
        CVector v(2);
        switch (s[q]) {
            case 'X':
                v << h, (bit ? -h : h);
                break;
            case 'Y':
                v << h, (bit ? cplx(0, -h) : cplx(0, h));
                break;
            default:
                v << (bit ? 0.0 : 1.0), (bit ? 1.0 : 0.0);
                break;
        }
        CVector next(out.size() * 2);
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            next(2 * i) = out(i) * v(0);
            next(2 * i + 1) = out(i) * v(1);
        }
        out = std::move(next);
    }
    return out;
}

int weight(std::string_view s) {
    int w = 0;
    for (char c : s) {
        w += c != 'I';
    }
    return w;
}

bool covered_by(std::string_view s, std::string_view setting) {
    if (s.size() != setting.size()) {
        return false;
    }
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] != 'I' && s[i] != setting[i]) {
            return false;
        }
    }
    return true;
}

}  // namespace qdyn::pauli
