#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

#include "qdyn/sdp.hpp"

namespace qdyn::sdp {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

using Key = std::tuple<int, int, int, int>;  // matrix, block, i, j (1-based, i <= j)

// Adds value * embed(smat(e_k)) to the block, where e_k is svec coordinate k
// of an n x n Hermitian matrix.
void add_coord(std::map<Key, double> &acc, int mat, int blk, int n, int k, double value) {
    int j = 0;
    while ((j + 1) * (j + 1) <= k) {
        ++j;
    }
    const int off = k - j * j;
    auto put = [&](int r, int c, double v) {
        if (r > c) {
            std::swap(r, c);
        }
        acc[{mat, blk, r + 1, c + 1}] += v;
    };
    if (off == 2 * j) {
        put(j, j, value);
        put(n + j, n + j, value);
        return;
    }
    const int i = off / 2;
    const double v = value * kInvSqrt2;
    if (off % 2 == 0) {
        put(i, j, v);
        put(n + i, n + j, v);
    } else {
        put(i, n + j, -v);
        put(j, n + i, v);
    }
}

}  // namespace

void write_sdpa(const Problem &p, std::ostream &out) {
    std::vector<int> offset;
    int nvars = 0;
    for (const auto &v : p.vars()) {
        offset.push_back(nvars);
        nvars += herm_size(v.dim);
    }
    std::vector<int> block_sizes;
    std::map<Key, double> acc;

    for (size_t vi = 0; vi < p.vars().size(); ++vi) {
        const auto &v = p.vars()[vi];
        if (v.kind != VarKind::Psd) {
            continue;
        }
        block_sizes.push_back(2 * v.dim);
        const int blk = static_cast<int>(block_sizes.size());
        for (int k = 0; k < herm_size(v.dim); ++k) {
            add_coord(acc, offset[vi] + k + 1, blk, v.dim, k, 1.0);
        }
    }
    for (const auto &c : p.constraints()) {
        const int size = herm_size(c.expr.dim());
        if (c.kind == ConstraintKind::Psd) {
            block_sizes.push_back(2 * c.expr.dim());
            const int blk = static_cast<int>(block_sizes.size());
            for (const auto &[id, t] : c.expr.terms()) {
                for (int col = 0; col < t.outerSize(); ++col) {
                    for (SparseMatrix::InnerIterator it(t, col); it; ++it) {
                        add_coord(acc, offset[id] + col + 1, blk, c.expr.dim(), static_cast<int>(it.row()),
                                  it.value());
                    }
                }
            }
            for (int k = 0; k < size; ++k) {
                const double c0 = c.expr.constant_coords()(k);
                if (c0 != 0.0) {
                    add_coord(acc, 0, blk, c.expr.dim(), k, -c0);
                }
            }
        } else {
            // expr_k >= 0 and -expr_k >= 0 as a diagonal LP block
            block_sizes.push_back(-2 * size);
            const int blk = static_cast<int>(block_sizes.size());
            for (const auto &[id, t] : c.expr.terms()) {
                for (int col = 0; col < t.outerSize(); ++col) {
                    for (SparseMatrix::InnerIterator it(t, col); it; ++it) {
                        const int r = static_cast<int>(it.row());
                        acc[{offset[id] + col + 1, blk, 2 * r + 1, 2 * r + 1}] += it.value();
                        acc[{offset[id] + col + 1, blk, 2 * r + 2, 2 * r + 2}] -= it.value();
                    }
                }
            }
            for (int k = 0; k < size; ++k) {
                const double c0 = c.expr.constant_coords()(k);
                if (c0 != 0.0) {
                    acc[{0, blk, 2 * k + 1, 2 * k + 1}] -= c0;
                    acc[{0, blk, 2 * k + 2, 2 * k + 2}] += c0;
                }
            }
        }
    }

    const double sgn = p.sense() == Sense::Minimize ? 1.0 : -1.0;
    RVector cvec = RVector::Zero(nvars);
    for (const auto &[id, t] : p.objective().terms()) {
        for (int col = 0; col < t.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(t, col); it; ++it) {
                cvec(offset[id] + col) += sgn * it.value();
            }
        }
    }

    out << "\"qdyn export: minimize c'x, sum F_i x_i - F_0 >= 0";
    if (p.sense() == Sense::Maximize) {
        out << ", objective negated";
    }
    out << "\n";
    out << nvars << "\n" << block_sizes.size() << "\n";
    for (size_t i = 0; i < block_sizes.size(); ++i) {
        out << (i ? " " : "") << block_sizes[i];
    }
    out << "\n";
    out.precision(17);
    for (int i = 0; i < nvars; ++i) {
        out << (i ? " " : "") << cvec(i);
    }
    out << "\n";
    for (const auto &[key, v] : acc) {
        if (v == 0.0) {
            continue;
        }
        const auto &[mat, blk, i, j] = key;
        out << mat << " " << blk << " " << i << " " << j << " " << v << "\n";
    }
}

}  // namespace qdyn::sdp
