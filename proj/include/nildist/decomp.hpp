#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "nildist/matrix.hpp"

namespace nildist {

/// Thrown when an iterative factorization fails to converge or an input
/// leaves the numerical contract of an operation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Complex Givens rotation: c real, s complex with
/// [[c, s], [-conj(s), c]] * [f; g] = [r; 0] and c^2 + |s|^2 = 1.
inline void givensRotation(Complex f, Complex g, double& c, Complex& s, Complex& r) {
    const double af = std::abs(f);
    const double ag = std::abs(g);
    if (ag == 0.0) {
        c = 1.0;
        s = 0.0;
        r = f;
        return;
    }
    if (af == 0.0) {
        c = 0.0;
        s = std::conj(g) / ag;
        r = ag;
        return;
    }
    const double d = std::hypot(af, ag);
    const Complex phase = f / af;
    c = af / d;
    s = phase * std::conj(g) / d;
    r = phase * d;
}

}  // namespace detail

struct QrResult {
    CMatrix q;  // m x m unitary
    CMatrix r;  // m x n upper trapezoidal
};

/// Householder QR of an m x n complex matrix, full Q.
inline QrResult householderQr(const CMatrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    CMatrix r = a;
    CMatrix q = CMatrix::identity(m);
    std::vector<Complex> v(m);

    const std::size_t steps = std::min(m, n);
    for (std::size_t k = 0; k < steps; ++k) {
        // Reflect column k below the diagonal.
        double tail = 0.0;
        for (std::size_t i = k + 1; i < m; ++i) tail += std::norm(r(i, k));
        const Complex alpha = r(k, k);
        if (tail == 0.0) continue;  // already triangular here
        const double normx = std::sqrt(std::norm(alpha) + tail);
        if (normx == 0.0) continue;
        const Complex phase = std::abs(alpha) > 0.0 ? alpha / std::abs(alpha) : Complex(1.0);
        const Complex beta = phase * normx;
        double vv = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            v[i] = r(i, k);
            if (i == k) v[i] += beta;
            vv += std::norm(v[i]);
        }
        if (vv <= 0.0) continue;
        const double w = 2.0 / vv;
        // R <- H R on the active block.
        for (std::size_t j = k; j < n; ++j) {
            Complex t = 0.0;
            for (std::size_t i = k; i < m; ++i) t += std::conj(v[i]) * r(i, j);
            t *= w;
            for (std::size_t i = k; i < m; ++i) r(i, j) -= t * v[i];
        }
        // Q <- Q H.
        for (std::size_t row = 0; row < m; ++row) {
            Complex t = 0.0;
            for (std::size_t i = k; i < m; ++i) t += q(row, i) * v[i];
            t *= w;
            for (std::size_t i = k; i < m; ++i) q(row, i) -= t * std::conj(v[i]);
        }
        r(k, k) = -beta;
        for (std::size_t i = k + 1; i < m; ++i) r(i, k) = 0.0;
    }
    return {std::move(q), std::move(r)};
}

struct HermitianEig {
    std::vector<double> values;  // ascending
    CMatrix vectors;             // unitary, A = V diag(values) V*
};

/// Eigendecomposition of a Hermitian matrix: complex Householder
/// tridiagonalization, diagonal phase pass to make the subdiagonal real,
/// then implicit-shift QL with accumulated transforms.
inline HermitianEig hermitianEig(const CMatrix& a) {
    const std::size_t n = a.dim();
    CMatrix h = a;
    CMatrix z = CMatrix::identity(n);
    std::vector<Complex> v(n);

    // Tridiagonalize.
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double tail = 0.0;
        for (std::size_t i = k + 2; i < n; ++i) tail += std::norm(h(i, k));
        if (tail == 0.0) continue;
        const Complex alpha = h(k + 1, k);
        const double normx = std::sqrt(std::norm(alpha) + tail);
        const Complex phase = std::abs(alpha) > 0.0 ? alpha / std::abs(alpha) : Complex(1.0);
        const Complex beta = phase * normx;
        double vv = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = h(i, k);
            if (i == k + 1) v[i] += beta;
            vv += std::norm(v[i]);
        }
        if (vv <= 0.0) continue;
        const double w = 2.0 / vv;
        // Left: rows k+1..n-1, columns k..n-1.
        for (std::size_t j = k; j < n; ++j) {
            Complex t = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) t += std::conj(v[i]) * h(i, j);
            t *= w;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= t * v[i];
        }
        // Right: columns k+1..n-1, rows k..n-1 (rows above k are already zero there).
        for (std::size_t i = k; i < n; ++i) {
            Complex t = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) t += h(i, j) * v[j];
            t *= w;
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= t * std::conj(v[j]);
        }
        // Accumulate Z <- Z H.
        for (std::size_t row = 0; row < n; ++row) {
            Complex t = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) t += z(row, i) * v[i];
            t *= w;
            for (std::size_t i = k + 1; i < n; ++i) z(row, i) -= t * std::conj(v[i]);
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }

    // Real tridiagonal data with a diagonal phase similarity.
    std::vector<double> d(n), e(n, 0.0);
    Complex delta = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = h(i, i).real();
        if (i + 1 < n) {
            const Complex sub = h(i + 1, i);
            const double mag = std::abs(sub);
            const Complex deltaNext = mag > 0.0 ? delta * (sub / mag) : delta;
            e[i] = mag;
            if (deltaNext != Complex(1.0)) {
                for (std::size_t row = 0; row < n; ++row) z(row, i + 1) *= deltaNext;
            }
            delta = deltaNext;
        }
    }

    // Implicit-shift QL (EISPACK tql2 lineage) with complex vector accumulation.
    const double eps = detail::kEps;
    double f = 0.0;
    double tst1 = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n) {
            if (std::abs(e[m]) <= eps * tst1) break;
            ++m;
        }
        if (m > l) {
            int iter = 0;
            do {
                if (++iter > 100)
                    throw NumericalError("hermitianEig: QL iteration did not converge");
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0.0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double hshift = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= hshift;
                f += hshift;

                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (std::size_t ii = m; ii-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[ii];
                    hshift = c * p;
                    r = std::hypot(p, e[ii]);
                    e[ii + 1] = s * r;
                    s = e[ii] / r;
                    c = p / r;
                    p = c * d[ii] - s * g;
                    d[ii + 1] = hshift + s * (c * g + s * d[ii]);
                    for (std::size_t row = 0; row < n; ++row) {
                        const Complex tmp = z(row, ii + 1);
                        z(row, ii + 1) = s * z(row, ii) + c * tmp;
                        z(row, ii) = c * z(row, ii) - s * tmp;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Sort ascending.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t k = i;
        for (std::size_t j = i + 1; j < n; ++j)
            if (d[j] < d[k]) k = j;
        if (k != i) {
            std::swap(d[i], d[k]);
            for (std::size_t row = 0; row < n; ++row) std::swap(z(row, i), z(row, k));
        }
    }
    return {std::move(d), std::move(z)};
}

struct Svd {
    CMatrix u;                  // m x m unitary
    std::vector<double> sigma;  // min(m, n) singular values, descending
    CMatrix v;                  // n x n unitary; A = U diag(sigma) V*
};

namespace detail {

// One-sided Jacobi on the columns of g (m x n with m >= n), optionally
// accumulating the right rotations into v.
inline void jacobiOrthogonalize(CMatrix& g, CMatrix* v) {
    const std::size_t m = g.rows();
    const std::size_t n = g.cols();
    const int maxSweeps = 60;
    for (int sweep = 0; sweep < maxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                double a = 0.0, b = 0.0;
                Complex c = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const Complex gj = g(i, j), gk = g(i, k);
                    a += std::norm(gj);
                    b += std::norm(gk);
                    c += std::conj(gj) * gk;
                }
                const double ac = std::abs(c);
                if (ac <= 1e-15 * std::sqrt(a * b) || ac == 0.0) continue;
                rotated = true;
                const Complex ph = c / ac;
                const double tau = (b - a) / (2.0 * ac);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(tau, 1.0));
                const double cs = 1.0 / std::hypot(t, 1.0);
                const double sn = cs * t;
                const Complex phc = std::conj(ph);
                for (std::size_t i = 0; i < m; ++i) {
                    const Complex gj = g(i, j), gk = g(i, k);
                    g(i, j) = cs * gj - sn * (phc * gk);
                    g(i, k) = sn * (ph * gj) + cs * gk;
                }
                if (v != nullptr) {
                    for (std::size_t i = 0; i < v->rows(); ++i) {
                        const Complex vj = (*v)(i, j), vk = (*v)(i, k);
                        (*v)(i, j) = cs * vj - sn * (phc * vk);
                        (*v)(i, k) = sn * (ph * vj) + cs * vk;
                    }
                }
            }
        }
        if (!rotated) return;
    }
}

// Extend the orthonormal columns cols[0..r) of u (m x m) to a full basis
// using Gram-Schmidt over standard basis vectors. Deterministic.
inline void completeOrthonormalBasis(CMatrix& u, std::size_t r) {
    const std::size_t m = u.rows();
    std::size_t filled = r;
    for (std::size_t cand = 0; cand < m && filled < m; ++cand) {
        std::vector<Complex> w(m, 0.0);
        w[cand] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < filled; ++j) {
                Complex dot = 0.0;
                for (std::size_t i = 0; i < m; ++i) dot += std::conj(u(i, j)) * w[i];
                for (std::size_t i = 0; i < m; ++i) w[i] -= dot * u(i, j);
            }
        }
        double nrm = 0.0;
        for (const auto& x : w) nrm += std::norm(x);
        nrm = std::sqrt(nrm);
        if (nrm > 0.25) {
            for (std::size_t i = 0; i < m; ++i) u(i, filled) = w[i] / nrm;
            ++filled;
        }
    }
    if (filled < m) throw NumericalError("completeOrthonormalBasis: could not complete basis");
}

}  // namespace detail

/// Singular values only (descending).
inline std::vector<double> singularValues(const CMatrix& a) {
    CMatrix g = a.rows() >= a.cols() ? a : a.adjoint();
    detail::jacobiOrthogonalize(g, nullptr);
    std::vector<double> s(g.cols());
    for (std::size_t j = 0; j < g.cols(); ++j) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < g.rows(); ++i) nrm += std::norm(g(i, j));
        s[j] = std::sqrt(nrm);
    }
    std::sort(s.begin(), s.end(), std::greater<double>());
    return s;
}

/// Full SVD via one-sided Jacobi. Columns of U beyond the numerical rank are
/// completed to an orthonormal basis.
inline Svd jacobiSvd(const CMatrix& a) {
    if (a.rows() < a.cols()) {
        Svd t = jacobiSvd(a.adjoint());
        return {std::move(t.v), std::move(t.sigma), std::move(t.u)};
    }
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    CMatrix g = a;
    CMatrix v = CMatrix::identity(n);
    detail::jacobiOrthogonalize(g, &v);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> nrm(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += std::norm(g(i, j));
        nrm[j] = std::sqrt(s);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return nrm[x] > nrm[y]; });

    Svd out;
    out.sigma.resize(n);
    out.u = CMatrix(m, m);
    out.v = CMatrix(n, n);
    const double cutoff = (n > 0 ? nrm[order[0]] : 0.0) * static_cast<double>(m) * detail::kEps;
    std::size_t rank = 0;
    for (std::size_t jj = 0; jj < n; ++jj) {
        const std::size_t j = order[jj];
        out.sigma[jj] = nrm[j];
        for (std::size_t i = 0; i < n; ++i) out.v(i, jj) = v(i, j);
        if (nrm[j] > cutoff && nrm[j] > 0.0) {
            for (std::size_t i = 0; i < m; ++i) out.u(i, jj) = g(i, j) / nrm[j];
            rank = jj + 1;
        }
    }
    detail::completeOrthonormalBasis(out.u, rank);
    return out;
}

struct SchurResult {
    CMatrix u;               // unitary
    CMatrix t;               // upper triangular, A = U T U*
    std::size_t iterations;  // total QR steps
};

/// Complex Schur form: Householder Hessenberg reduction followed by
/// implicit single-shift QR with Wilkinson shifts and exceptional shifts
/// on stagnation.
inline SchurResult schurDecompose(const CMatrix& a, std::size_t maxIterFactor = 60) {
    const std::size_t n = a.dim();
    CMatrix h = a;
    CMatrix u = CMatrix::identity(n);
    std::vector<Complex> v(n);

    // Hessenberg reduction.
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double tail = 0.0;
        for (std::size_t i = k + 2; i < n; ++i) tail += std::norm(h(i, k));
        if (tail == 0.0) continue;
        const Complex alpha = h(k + 1, k);
        const double normx = std::sqrt(std::norm(alpha) + tail);
        const Complex phase = std::abs(alpha) > 0.0 ? alpha / std::abs(alpha) : Complex(1.0);
        const Complex beta = phase * normx;
        double vv = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = h(i, k);
            if (i == k + 1) v[i] += beta;
            vv += std::norm(v[i]);
        }
        if (vv <= 0.0) continue;
        const double w = 2.0 / vv;
        for (std::size_t j = k; j < n; ++j) {  // left
            Complex t = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) t += std::conj(v[i]) * h(i, j);
            t *= w;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= t * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {  // right
            Complex t = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) t += h(i, j) * v[j];
            t *= w;
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= t * std::conj(v[j]);
        }
        for (std::size_t row = 0; row < n; ++row) {  // accumulate
            Complex t = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) t += u(row, i) * v[i];
            t *= w;
            for (std::size_t i = k + 1; i < n; ++i) u(row, i) -= t * std::conj(v[i]);
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }

    double hscale = h.maxAbs();
    if (hscale == 0.0) hscale = 1.0;
    const double eps = detail::kEps;
    std::size_t total = 0;
    const std::size_t maxTotal = maxIterFactor * std::max<std::size_t>(n, 1);

    if (n > 1) {
        std::size_t hi = n - 1;
        std::size_t sinceDeflate = 0;
        while (true) {
            // Deflate small subdiagonals from the bottom of the active window.
            std::size_t lo = hi;
            while (lo > 0) {
                const double sd = std::abs(h(lo, lo - 1));
                double sc = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
                if (sc == 0.0) sc = hscale;
                if (sd <= eps * sc) {
                    h(lo, lo - 1) = 0.0;
                    break;
                }
                --lo;
            }
            if (lo == hi) {
                if (hi == 0) break;
                --hi;
                sinceDeflate = 0;
                continue;
            }
            if (++total > maxTotal)
                throw NumericalError("schurDecompose: QR iteration did not converge after " +
                                     std::to_string(total) + " steps");
            ++sinceDeflate;

            Complex mu;
            const double sdsum = std::abs(h(hi, hi - 1)) +
                                 (hi >= lo + 2 ? std::abs(h(hi - 1, hi - 2)) : 0.0);
            if (sinceDeflate % 20 == 0) {
                mu = h(hi, hi) + Complex(0.44690, 0.73490) * sdsum;  // symmetry-breaking shift
            } else if (sinceDeflate % 10 == 0) {
                mu = h(hi, hi) + 0.75 * sdsum;
            } else {
                const Complex ta = h(hi - 1, hi - 1), tb = h(hi - 1, hi);
                const Complex tc = h(hi, hi - 1), td = h(hi, hi);
                const Complex tr = ta + td;
                const Complex det = ta * td - tb * tc;
                const Complex disc = std::sqrt(tr * tr - 4.0 * det);
                const Complex l1 = 0.5 * (tr + disc);
                const Complex l2 = 0.5 * (tr - disc);
                mu = std::abs(l1 - td) < std::abs(l2 - td) ? l1 : l2;
            }

            Complex x = h(lo, lo) - mu;
            Complex zb = h(lo + 1, lo);
            for (std::size_t k = lo; k < hi; ++k) {
                double c;
                Complex s, r;
                detail::givensRotation(x, zb, c, s, r);
                const std::size_t jstart = k == lo ? lo : k - 1;
                for (std::size_t j = jstart; j < n; ++j) {  // rows k, k+1 from the left
                    const Complex t1 = h(k, j), t2 = h(k + 1, j);
                    h(k, j) = c * t1 + s * t2;
                    h(k + 1, j) = -std::conj(s) * t1 + c * t2;
                }
                const std::size_t iend = std::min(hi, k + 2);
                for (std::size_t i = 0; i <= iend; ++i) {  // columns k, k+1 from the right
                    const Complex t1 = h(i, k), t2 = h(i, k + 1);
                    h(i, k) = c * t1 + std::conj(s) * t2;
                    h(i, k + 1) = -s * t1 + c * t2;
                }
                for (std::size_t i = 0; i < n; ++i) {  // accumulate U
                    const Complex t1 = u(i, k), t2 = u(i, k + 1);
                    u(i, k) = c * t1 + std::conj(s) * t2;
                    u(i, k + 1) = -s * t1 + c * t2;
                }
                if (k + 1 < hi) {
                    x = h(k + 1, k);
                    zb = h(k + 2, k);
                }
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) h(i, j) = 0.0;
    return {std::move(u), std::move(h), total};
}

}  // namespace nildist
