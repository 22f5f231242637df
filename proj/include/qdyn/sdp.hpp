#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "qdyn/types.hpp"

/// First-order conic solver for semidefinite programs over complex Hermitian
/// blocks.
///
/// Problems are built with `Problem` from Hermitian matrix variables and affine
/// expressions over them (`Expr`). Internally every Hermitian n x n matrix is
/// stored as n^2 real coordinates (diagonal entries, then sqrt(2)*Re and
/// sqrt(2)*Im of each strict upper entry), an isometry for the trace inner
/// product. The compiled problem has the standard form
///
///     minimize q'x   subject to   A x + s = b,   s in K,
///
/// with K a product of zero cones and Hermitian PSD cones, and is solved by an
/// over-relaxed ADMM iteration whose linear step reuses one sparse LDL'
/// factorization of sigma*I + A' R A until the penalty R changes.
namespace qdyn::sdp {

using SparseMatrix = Eigen::SparseMatrix<double>;
using LinearMap = std::function<CMatrix(const CMatrix &)>;

/// Number of real coordinates of an n x n Hermitian matrix.
constexpr int herm_size(int n) { return n * n; }

void svec(const CMatrix &h, double *out);
RVector svec(const CMatrix &h);
CMatrix smat(const double *coords, int n);
CMatrix smat(const RVector &coords, int n);

/// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.
/// Its spectrum is that of H with every multiplicity doubled.
RMatrix embed_hermitian(const CMatrix &h);

enum class Sense { Minimize, Maximize };
enum class Status { Optimal, MaxIter, Infeasible };
enum class VarKind { Psd, Free };

const char *to_string(Status s);
Status status_from_string(std::string_view s);

/// Handle to a Hermitian matrix variable of a Problem.
struct Var {
    int id = -1;
    int dim = 0;
};

/// Affine Hermitian-matrix valued expression of the problem variables.
class Expr {
   public:
    Expr() = default;
    explicit Expr(int dim);

    static Expr of(const Var &v);
    static Expr constant(const CMatrix &c);
    static Expr scalar(double c);

    int dim() const { return dim_; }

    /// Applies a linear, Hermiticity-preserving map to the expression. The map
    /// is probed on a coordinate basis, so it must be linear.
    Expr map(int out_dim, const LinearMap &f) const;

    /// Tr(C X) for Hermitian C; the result is a scalar (1 x 1) expression.
    Expr inner(const CMatrix &c) const;
    Expr trace() const;

    Expr &operator+=(const Expr &o);
    Expr &operator-=(const Expr &o);
    Expr &operator*=(double a);
    friend Expr operator+(Expr a, const Expr &b) { return a += b; }
    friend Expr operator-(Expr a, const Expr &b) { return a -= b; }
    friend Expr operator*(double a, Expr e) { return e *= a; }
    friend Expr operator*(Expr e, double a) { return e *= a; }
    friend Expr operator-(Expr e) { return e *= -1.0; }

    /// Evaluates the expression at the given variable values (indexed by var id).
    CMatrix evaluate(std::span<const CMatrix> values) const;

    const std::map<int, SparseMatrix> &terms() const { return terms_; }
    const RVector &constant_coords() const { return constant_; }

   private:
    int dim_ = 0;
    std::map<int, SparseMatrix> terms_;
    RVector constant_;
};

struct VarInfo {
    std::string name;
    int dim;
    VarKind kind;
};

enum class ConstraintKind { Equality, Psd };

struct ConstraintInfo {
    std::string name;
    ConstraintKind kind;
    Expr expr;
};

class Problem {
   public:
    Var add_psd(std::string name, int dim);
    Var add_free(std::string name, int dim);

    /// expr == 0
    int add_equality(std::string name, Expr expr);
    /// expr >= 0 in the PSD order; realized with a slack PSD block.
    int add_psd_constraint(std::string name, Expr expr);

    void set_objective(Sense sense, Expr scalar_expr);

    const std::vector<VarInfo> &vars() const { return vars_; }
    const std::vector<ConstraintInfo> &constraints() const { return constraints_; }
    const Expr &objective() const { return objective_; }
    Sense sense() const { return sense_; }
    Var var(int id) const { return {id, vars_.at(id).dim}; }

   private:
    void check_expr(const Expr &e) const;

    std::vector<VarInfo> vars_;
    std::vector<ConstraintInfo> constraints_;
    Expr objective_ = Expr::scalar(0.0);
    Sense sense_ = Sense::Minimize;
};

struct Settings {
    double tol = 1e-7;
    int max_iter = 200000;
    double alpha = 1.6;        // over-relaxation
    double rho = 0.1;          // initial penalty
    double sigma = 1e-6;       // proximal term on x
    double eq_rho_scale = 1e3;  // penalty multiplier on equality rows
    int adapt_interval = 100;
    double adapt_factor = 2.0;
    double adapt_threshold = 5.0;
    double rho_min = 1e-4;
    double rho_max = 1e4;
    int check_interval = 10;
    double infeasibility_tol = 1e-6;
    double plateau_residual = 1e-3;
    int refine_steps = 1;  // iterative refinement of each linear solve

    /// Reads QDYN_SDP_TOL / QDYN_SDP_MAX_ITER from the environment, if set.
    static Settings from_env();
    static Settings from_env(Settings base);
};

struct Solution {
    Status status = Status::MaxIter;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap_estimate = 0.0;
    int iterations = 0;
    std::vector<CMatrix> values;  // per variable
    std::vector<CMatrix> duals;   // per constraint; PSD multipliers are PSD

    const CMatrix &value(const Var &v) const { return values.at(v.id); }
};

/// Residuals of a candidate point measured directly on the Problem's
/// constraints, independent of the solver's internal state.
struct ConstraintReport {
    double max_equality_violation = 0.0;  // max |expr| entry over equalities
    double min_psd_eigenvalue = 0.0;      // smallest eigenvalue over PSD vars and constraints
    double objective = 0.0;
};

ConstraintReport check_point(const Problem &p, std::span<const CMatrix> values);

/// A solver instance owns its workspace and keeps its last iterate, so
/// repeated calls to solve() after set_objective() are warm started and reuse
/// the factorization. Not thread-safe; use one instance per thread.
class Solver {
   public:
    explicit Solver(const Problem &p, Settings s = {});
    ~Solver();
    Solver(Solver &&) noexcept;
    Solver &operator=(Solver &&) noexcept;

    /// Replaces the objective; constraints stay fixed.
    void set_objective(Sense sense, const Expr &scalar_expr);
    Solution solve();
    void reset_warm_start();

    int num_variables() const;
    int num_rows() const;

   private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Solution solve(const Problem &p, Settings s = {});

/// Writes the problem in an SDPA-like sparse text format using the real
/// symmetric embedding of each Hermitian block. Equalities become a pair of
/// opposite LP rows. Meant for cross-checking with external solvers.
void write_sdpa(const Problem &p, std::ostream &out);

}  // namespace qdyn::sdp
