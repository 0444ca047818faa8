#include "xlsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xlsim::la {

LdlFactor ldl_factor(const CMat& a, MultCounter* mc) {
    const int n = a.rows();
    if (n != a.cols()) throw LinalgError("ldl_factor: matrix not square");
    LdlFactor f;
    f.n = n;
    f.lmat = CMat(n, n);
    f.d.resize(n);
    std::uint64_t cmul = 0;
    for (int j = 0; j < n; ++j) {
        double dj = a(j, j).real();
        for (int s = 0; s < j; ++s) {
            const cd w = std::conj(f.lmat(j, s)) * f.d[s];
            dj -= (f.lmat(j, s) * w).real();
            cmul += 2;
        }
        if (!(dj > 0.0)) throw LinalgError("ldl_factor: nonpositive pivot");
        f.d[j] = dj;
        for (int i = j + 1; i < n; ++i) {
            cd acc = a(i, j);
            for (int s = 0; s < j; ++s) {
                const cd w = std::conj(f.lmat(j, s)) * f.d[s];
                acc -= f.lmat(i, s) * w;
                cmul += 2;
            }
            f.lmat(i, j) = acc / dj;
        }
    }
    if (mc) mc->factor_cmul += cmul;
    return f;
}

namespace {

// L z = b, overwrites x
inline void forward_subst(const LdlFactor& f, cd* x, std::uint64_t* cmul) {
    const int n = f.n;
    std::uint64_t c = 0;
    for (int i = 1; i < n; ++i) {
        cd acc = x[i];
        for (int s = 0; s < i; ++s) acc -= f.lmat(i, s) * x[s];
        c += static_cast<std::uint64_t>(i);
        x[i] = acc;
    }
    if (cmul) *cmul += c;
}

inline void diag_scale(const LdlFactor& f, cd* x, std::uint64_t* rdiv) {
    for (int i = 0; i < f.n; ++i) x[i] /= f.d[i];
    if (rdiv) *rdiv += 2ull * f.n;
}

}  // namespace

void ldl_solve_in_place(const LdlFactor& f, cd* x) {
    forward_subst(f, x, nullptr);
    diag_scale(f, x, nullptr);
    for (int i = f.n - 2; i >= 0; --i) {
        cd acc = x[i];
        for (int s = i + 1; s < f.n; ++s) acc -= std::conj(f.lmat(s, i)) * x[s];
        x[i] = acc;
    }
}

double ldl_quad_form_inv(const LdlFactor& f, const cd* a) {
    CVec z(a, a + f.n);
    forward_subst(f, z.data(), nullptr);
    double q = 0.0;
    for (int i = 0; i < f.n; ++i) q += std::norm(z[i]) / f.d[i];
    return q;
}

double ldl_trace_solve(const LdlFactor& f, const CMat& b, MultCounter* mc) {
    const int n = f.n;
    if (b.rows() != n || b.cols() != n) throw LinalgError("ldl_trace_solve: size mismatch");
    CVec work(n);
    double trace = 0.0;
    std::uint64_t fwd = 0, rdiv = 0, back = 0;
    for (int m = 0; m < n; ++m) {
        std::copy(b.col(m), b.col(m) + n, work.begin());
        forward_subst(f, work.data(), &fwd);
        diag_scale(f, work.data(), &rdiv);
        // back-substitute only down to row m; rows above never feed the
        // diagonal entry we are after
        for (int i = n - 1; i >= m; --i) {
            cd acc = work[i];
            for (int s = i + 1; s < n; ++s) acc -= std::conj(f.lmat(s, i)) * work[s];
            back += static_cast<std::uint64_t>(n - 1 - i);
            work[i] = acc;
        }
        trace += work[m].real();
    }
    if (mc) {
        mc->forward_cmul += fwd;
        mc->diag_rdiv += rdiv;
        mc->backward_cmul += back;
    }
    return trace;
}

double trace_of_product(const CMat& a, const CMat& b, MultCounter* mc) {
    const int n = a.rows();
    if (a.cols() != n || b.rows() != n || b.cols() != n)
        throw LinalgError("trace_of_product: size mismatch");
    cd acc{};
    for (int j = 0; j < n; ++j) {
        const cd* bc = b.col(j);
        for (int i = 0; i < n; ++i) acc += a(j, i) * bc[i];
    }
    if (mc) mc->trace_product_cmul += static_cast<std::uint64_t>(n) * n;
    return acc.real();
}

double trace_real(const CMat& a) {
    double t = 0.0;
    for (int i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i).real();
    return t;
}

void gemv(cd alpha, const CMat& a, const cd* x, cd beta, cd* y) {
    const int m = a.rows(), n = a.cols();
    for (int i = 0; i < m; ++i) y[i] *= beta;
    for (int j = 0; j < n; ++j) {
        const cd axj = alpha * x[j];
        const cd* col = a.col(j);
        for (int i = 0; i < m; ++i) y[i] += col[i] * axj;
    }
}

void rank1_update(CMat& a, double alpha, const cd* x) {
    const int n = a.rows();
    for (int j = 0; j < n; ++j) {
        const cd axj = alpha * std::conj(x[j]);
        cd* col = a.col(j);
        for (int i = 0; i < n; ++i) col[i] += x[i] * axj;
    }
}

CMat matmul(const CMat& a, const CMat& b) {
    if (a.cols() != b.rows()) throw LinalgError("matmul: size mismatch");
    CMat c(a.rows(), b.cols());
    for (int j = 0; j < b.cols(); ++j) {
        for (int k = 0; k < a.cols(); ++k) {
            const cd bkj = b(k, j);
            const cd* col = a.col(k);
            cd* out = c.col(j);
            for (int i = 0; i < a.rows(); ++i) out[i] += col[i] * bkj;
        }
    }
    return c;
}

cd dot_conj(const cd* x, const cd* y, int n) {
    cd acc{};
    for (int i = 0; i < n; ++i) acc += std::conj(x[i]) * y[i];
    return acc;
}

double norm2(const cd* x, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::norm(x[i]);
    return acc;
}

EigH eig_hermitian(const CMat& a, int max_sweeps) {
    const int n = a.rows();
    if (n != a.cols()) throw LinalgError("eig_hermitian: matrix not square");
    CMat m = a;
    // enforce Hermitian symmetry of the working copy
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) {
            const cd avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
            m(i, j) = avg;
            m(j, i) = std::conj(avg);
        }
        m(j, j) = cd(m(j, j).real(), 0.0);
    }
    CMat v = CMat::identity(n);
    const double fro = frobenius(m);
    const double tol = 1e-14 * std::max(fro, 1e-300);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < j; ++i) off += std::norm(m(i, j));
        if (std::sqrt(off) <= tol) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cd apq = m(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300) continue;
                const double app = m(p, p).real();
                const double aqq = m(q, q).real();
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cd phase = apq / mag;  // e^{j phi}

                // columns: [p q] <- [p q] * U with
                //   U = [[c, s], [-s*conj(phase), c*conj(phase)]]
                for (int r = 0; r < n; ++r) {
                    const cd mrp = m(r, p), mrq = m(r, q);
                    m(r, p) = c * mrp - (s * std::conj(phase)) * mrq;
                    m(r, q) = s * mrp + (c * std::conj(phase)) * mrq;
                }
                // rows: U^H applied from the left
                for (int r = 0; r < n; ++r) {
                    const cd mpr = m(p, r), mqr = m(q, r);
                    m(p, r) = c * mpr - (s * phase) * mqr;
                    m(q, r) = s * mpr + (c * phase) * mqr;
                }
                for (int r = 0; r < n; ++r) {
                    const cd vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = c * vrp - (s * std::conj(phase)) * vrq;
                    v(r, q) = s * vrp + (c * std::conj(phase)) * vrq;
                }
                m(p, q) = cd{};
                m(q, p) = cd{};
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = m(i, i).real();
    std::sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] < diag[y]; });

    EigH out;
    out.w.resize(n);
    out.v = CMat(n, n);
    for (int k = 0; k < n; ++k) {
        out.w[k] = diag[order[k]];
        for (int i = 0; i < n; ++i) out.v(i, k) = v(i, order[k]);
    }
    return out;
}

CMat psd_sqrt(const CMat& a, double clamp_rel) {
    const int n = a.rows();
    EigH e = eig_hermitian(a);
    const double wmax = std::max(e.w.empty() ? 0.0 : e.w.back(), 0.0);
    const double floor_neg = -clamp_rel * std::max(wmax, 1e-300);
    CMat s(n, n);
    for (int k = 0; k < n; ++k) {
        double w = e.w[k];
        if (w < floor_neg) throw LinalgError("psd_sqrt: matrix indefinite beyond tolerance");
        if (w < 0.0) w = 0.0;
        const double r = std::sqrt(w);
        if (r == 0.0) continue;
        for (int j = 0; j < n; ++j) {
            const cd fac = r * std::conj(e.v(j, k));
            cd* col = s.col(j);
            const cd* vk = e.v.col(k);
            for (int i = 0; i < n; ++i) col[i] += vk[i] * fac;
        }
    }
    // round-off symmetrization
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) {
            const cd avg = 0.5 * (s(i, j) + std::conj(s(j, i)));
            s(i, j) = avg;
            s(j, i) = std::conj(avg);
        }
        s(j, j) = cd(s(j, j).real(), 0.0);
    }
    return s;
}

double frobenius(const CMat& a) {
    double acc = 0.0;
    const cd* p = a.data();
    const size_t total = static_cast<size_t>(a.rows()) * a.cols();
    for (size_t i = 0; i < total; ++i) acc += std::norm(p[i]);
    return std::sqrt(acc);
}

}  // namespace xlsim::la
