#ifndef XLSIM_TESTS_ORACLES_HPP
#define XLSIM_TESTS_ORACLES_HPP

// Independent reference computations for the test suites. Nothing here may
// call back into the factorization/solve paths it is used to check.

#include <cmath>
#include <functional>
#include <vector>

#include "xlsim/linalg.hpp"
#include "xlsim/rng.hpp"

namespace oracle {

using xlsim::la::cd;
using xlsim::la::CMat;
using xlsim::la::CVec;

/// Dense inverse by Gauss-Jordan elimination with partial pivoting.
inline CMat dense_inverse(CMat a) {
    const int n = a.rows();
    CMat inv = CMat::identity(n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (pivot != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(a(col, j), a(pivot, j));
                std::swap(inv(col, j), inv(pivot, j));
            }
        }
        const cd d = a(col, col);
        for (int j = 0; j < n; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const cd f = a(r, col);
            if (f == cd{}) continue;
            for (int j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

inline cd quad_form(const CMat& a, const CVec& x) {
    cd acc{};
    for (int j = 0; j < a.cols(); ++j)
        for (int i = 0; i < a.rows(); ++i) acc += std::conj(x[i]) * a(i, j) * x[j];
    return acc;
}

/// Compensated (Kahan) summation.
inline double kahan_sum(const std::vector<double>& v) {
    double sum = 0.0, carry = 0.0;
    for (double x : v) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

/// Random Hermitian positive definite matrix with eigenvalues in about
/// [shift, shift + 2].
inline CMat random_hpd(int n, xlsim::rng::Stream& stream, double shift = 0.5) {
    CMat g(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = stream.cnormal();
    CMat a(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            cd acc{};
            for (int k = 0; k < n; ++k) acc += g(i, k) * std::conj(g(j, k));
            a(i, j) = acc / static_cast<double>(n);
        }
    for (int i = 0; i < n; ++i) a(i, i) += shift;
    return a;
}

inline CVec random_cvec(int n, xlsim::rng::Stream& stream) {
    CVec v(n);
    for (auto& x : v) x = stream.cnormal();
    return v;
}

/// Nelder-Mead maximization over R^n with restarts; good enough to pin a
/// smooth unimodal-up-to-scale objective to fractions of a percent.
inline double nelder_mead_max(std::function<double(const std::vector<double>&)> f, int dim,
                              xlsim::rng::Stream& stream, int restarts = 12, int iters = 600) {
    auto run_from = [&](std::vector<double> start) {
        const int n = dim;
        std::vector<std::vector<double>> simplex(n + 1, start);
        std::vector<double> val(n + 1);
        for (int i = 0; i < n; ++i) simplex[i + 1][i] += 0.5;
        for (int i = 0; i <= n; ++i) val[i] = f(simplex[i]);
        for (int it = 0; it < iters; ++it) {
            int hi = 0, lo = 0;
            for (int i = 1; i <= n; ++i) {
                if (val[i] < val[lo]) lo = i;
                if (val[i] > val[hi]) hi = i;
            }
            // maximize: reflect the worst (lowest) point
            std::vector<double> centroid(n, 0.0);
            for (int i = 0; i <= n; ++i) {
                if (i == lo) continue;
                for (int d = 0; d < n; ++d) centroid[d] += simplex[i][d];
            }
            for (double& c : centroid) c /= n;
            auto blend = [&](double t) {
                std::vector<double> p(n);
                for (int d = 0; d < n; ++d) p[d] = centroid[d] + t * (centroid[d] - simplex[lo][d]);
                return p;
            };
            std::vector<double> refl = blend(1.0);
            const double fr = f(refl);
            if (fr > val[hi]) {
                std::vector<double> exp_p = blend(2.0);
                const double fe = f(exp_p);
                if (fe > fr) {
                    simplex[lo] = exp_p;
                    val[lo] = fe;
                } else {
                    simplex[lo] = refl;
                    val[lo] = fr;
                }
            } else if (fr > val[lo]) {
                simplex[lo] = refl;
                val[lo] = fr;
            } else {
                std::vector<double> con = blend(-0.5);
                const double fc = f(con);
                if (fc > val[lo]) {
                    simplex[lo] = con;
                    val[lo] = fc;
                } else {
                    for (int i = 0; i <= n; ++i) {
                        if (i == hi) continue;
                        for (int d = 0; d < n; ++d)
                            simplex[i][d] = 0.5 * (simplex[i][d] + simplex[hi][d]);
                        val[i] = f(simplex[i]);
                    }
                }
            }
        }
        double best = val[0];
        for (int i = 1; i <= n; ++i) best = std::max(best, val[i]);
        return best;
    };

    double best = -1e300;
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> start(dim);
        for (double& x : start) x = stream.normal();
        best = std::max(best, run_from(std::move(start)));
    }
    return best;
}

}  // namespace oracle

#endif
