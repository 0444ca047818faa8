#ifndef XLSIM_LINALG_HPP
#define XLSIM_LINALG_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace xlsim::la {

using cd = std::complex<double>;

struct LinalgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense column-major complex matrix. Small sizes only (subarray panels),
/// everything lives in one contiguous buffer.
class CMat {
public:
    CMat() = default;
    CMat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

    static CMat identity(int n) {
        CMat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    cd& operator()(int i, int j) { return a_[static_cast<size_t>(j) * rows_ + i]; }
    const cd& operator()(int i, int j) const { return a_[static_cast<size_t>(j) * rows_ + i]; }

    cd* col(int j) { return a_.data() + static_cast<size_t>(j) * rows_; }
    const cd* col(int j) const { return a_.data() + static_cast<size_t>(j) * rows_; }

    cd* data() { return a_.data(); }
    const cd* data() const { return a_.data(); }

    void set_zero() { std::fill(a_.begin(), a_.end(), cd{}); }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<cd> a_;
};

using CVec = std::vector<cd>;

/// Multiplication counters for the factor/solve pipeline. Complex products
/// are tallied per operation site; real_total() maps one complex product to
/// three real products and counts real divisions one-for-one.
struct MultCounter {
    std::uint64_t factor_cmul = 0;
    std::uint64_t forward_cmul = 0;
    std::uint64_t diag_rdiv = 0;
    std::uint64_t backward_cmul = 0;
    std::uint64_t trace_product_cmul = 0;

    std::uint64_t real_total() const {
        return 3 * (factor_cmul + forward_cmul + backward_cmul + trace_product_cmul) + diag_rdiv;
    }
    void reset() { *this = MultCounter{}; }
};

/// Unit-lower-triangular L and real diagonal d with A = L diag(d) L^H.
struct LdlFactor {
    int n = 0;
    CMat lmat;               // strictly lower part holds L, unit diagonal implied
    std::vector<double> d;
};

/// Factor a Hermitian positive definite matrix (lower triangle of `a` is
/// read). Throws LinalgError on a nonpositive pivot.
LdlFactor ldl_factor(const CMat& a, MultCounter* mc = nullptr);

/// x <- A^{-1} x using a previously computed factor.
void ldl_solve_in_place(const LdlFactor& f, cd* x);

/// a^H A^{-1} a, returned as a real number (A Hermitian PD).
double ldl_quad_form_inv(const LdlFactor& f, const cd* a);

/// Re tr(A^{-1} B) evaluated column by column: forward solve, diagonal
/// scaling, then a partial back-substitution that stops at the diagonal
/// entry actually needed. This is the instrumented path behind the ergodic
/// SINR evaluations.
double ldl_trace_solve(const LdlFactor& f, const CMat& b, MultCounter* mc = nullptr);

/// Re tr(A B) for square same-size matrices; one complex product per entry.
double trace_of_product(const CMat& a, const CMat& b, MultCounter* mc = nullptr);

double trace_real(const CMat& a);

/// y <- alpha * A x + beta * y
void gemv(cd alpha, const CMat& a, const cd* x, cd beta, cd* y);

/// A <- A + alpha * x x^H (alpha real, full matrix updated)
void rank1_update(CMat& a, double alpha, const cd* x);

/// C <- A * B
CMat matmul(const CMat& a, const CMat& b);

cd dot_conj(const cd* x, const cd* y, int n);  // x^H y
double norm2(const cd* x, int n);              // ||x||^2

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Eigenvalues ascending, V columns are the corresponding eigenvectors.
struct EigH {
    std::vector<double> w;
    CMat v;
};
EigH eig_hermitian(const CMat& a, int max_sweeps = 50);

/// Hermitian PSD square root via eigendecomposition. Eigenvalues below
/// -clamp_rel * max eigenvalue raise LinalgError, small negatives clamp to 0.
CMat psd_sqrt(const CMat& a, double clamp_rel = 1e-10);

double frobenius(const CMat& a);

}  // namespace xlsim::la

#endif
