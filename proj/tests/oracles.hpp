#pragma once

// Test-only root-finding oracles used to cross-check eigenvalue paths:
// closed-form quadratic/cubic/quartic solvers and Durand-Kerner iteration on
// the characteristic polynomial (coefficients from Newton's identities).
// Everything here is independent of the Schur/QL implementations it checks.

#include <cmath>
#include <complex>
#include <vector>

#include "nildist/matrix.hpp"

namespace testutil {

using nildist::CMatrix;
using nildist::Complex;

// x^2 + b x + c
inline std::vector<Complex> quadraticRoots(Complex b, Complex c) {
    const Complex disc = std::sqrt(b * b - 4.0 * c);
    Complex r1 = 0.5 * (-b + disc);
    const Complex r1alt = 0.5 * (-b - disc);
    if (std::abs(r1alt) > std::abs(r1)) r1 = r1alt;
    const Complex r2 = std::abs(r1) > 0.0 ? c / r1 : -b - r1;
    return {r1, r2};
}

// x^3 + a x^2 + b x + c (Cardano in complex arithmetic)
inline std::vector<Complex> cubicRoots(Complex a, Complex b, Complex c) {
    const Complex p = b - a * a / 3.0;
    const Complex q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const Complex omega(-0.5, std::sqrt(3.0) / 2.0);
    std::vector<Complex> ys;
    if (std::abs(p) < 1e-30) {
        const Complex r = std::pow(-q, 1.0 / 3.0);
        ys = {r, r * omega, r * omega * omega};
    } else {
        const Complex disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
        const Complex u3a = -q / 2.0 + disc;
        const Complex u3b = -q / 2.0 - disc;
        const Complex u3 = std::abs(u3a) >= std::abs(u3b) ? u3a : u3b;
        Complex u = std::pow(u3, 1.0 / 3.0);
        for (int k = 0; k < 3; ++k) {
            ys.push_back(u - p / (3.0 * u));
            u *= omega;
        }
    }
    for (auto& y : ys) y -= a / 3.0;
    return ys;
}

// x^4 + a x^3 + b x^2 + c x + d (Ferrari: resolvent cubic, two quadratics)
inline std::vector<Complex> quarticRoots(Complex a, Complex b, Complex c, Complex d) {
    const Complex a2 = a * a;
    const Complex p = b - 3.0 * a2 / 8.0;
    const Complex q = c - a * b / 2.0 + a2 * a / 8.0;
    const Complex r = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
    std::vector<Complex> ys;
    if (std::abs(q) < 1e-30) {
        for (const Complex z : quadraticRoots(p, r)) {
            const Complex s = std::sqrt(z);
            ys.push_back(s);
            ys.push_back(-s);
        }
    } else {
        const auto ms = cubicRoots(p, p * p / 4.0 - r, -q * q / 8.0);
        Complex m = ms[0];
        for (const Complex mm : ms)
            if (std::abs(mm) > std::abs(m)) m = mm;
        const Complex s = std::sqrt(2.0 * m);
        const auto r1 = quadraticRoots(s, p / 2.0 + m - q / (2.0 * s));
        const auto r2 = quadraticRoots(-s, p / 2.0 + m + q / (2.0 * s));
        ys = {r1[0], r1[1], r2[0], r2[1]};
    }
    for (auto& y : ys) y -= a / 4.0;
    return ys;
}

/// Elementary symmetric functions e_1..e_n of the eigenvalues via Newton's
/// identities on trace powers; char poly is sum_k (-1)^k e_k x^(n-k).
inline std::vector<Complex> elementarySymmetric(const CMatrix& a) {
    const std::size_t n = a.dim();
    std::vector<Complex> pows(n + 1);  // pows[k] = tr(A^k)
    CMatrix ak = a;
    for (std::size_t k = 1; k <= n; ++k) {
        pows[k] = ak.trace();
        if (k < n) ak = ak * a;
    }
    std::vector<Complex> e(n + 1);
    e[0] = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        Complex acc = 0.0;
        double sign = 1.0;
        for (std::size_t i = 1; i <= k; ++i) {
            acc += sign * e[k - i] * pows[i];
            sign = -sign;
        }
        e[k] = acc / static_cast<double>(k);
    }
    return e;
}

/// Eigenvalues by closed form (n <= 4).
inline std::vector<Complex> closedFormEigenvalues(const CMatrix& a) {
    const std::size_t n = a.dim();
    const auto e = elementarySymmetric(a);
    switch (n) {
        case 1:
            return {e[1]};
        case 2:
            return quadraticRoots(-e[1], e[2]);
        case 3:
            return cubicRoots(-e[1], e[2], -e[3]);
        case 4:
            return quarticRoots(-e[1], e[2], -e[3], e[4]);
        default:
            throw std::invalid_argument("closedFormEigenvalues: n must be <= 4");
    }
}

/// Durand-Kerner on the characteristic polynomial; independent iterative
/// eigenvalue oracle for moderate n.
inline std::vector<Complex> durandKernerEigenvalues(const CMatrix& a, std::size_t iters = 500) {
    const std::size_t n = a.dim();
    const auto e = elementarySymmetric(a);
    std::vector<Complex> coef(n + 1);  // coef[k] multiplies x^k, monic
    coef[n] = 1.0;
    double sign = -1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        coef[n - k] = sign * e[k];
        sign = -sign;
    }
    double radius = 0.0;
    for (std::size_t k = 0; k < n; ++k) radius = std::max(radius, std::abs(coef[k]));
    radius = 1.0 + radius;

    std::vector<Complex> z(n);
    const Complex seed(0.4, 0.9);
    Complex zk = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        zk *= seed;
        z[i] = radius * zk;
    }
    auto eval = [&](Complex x) {
        Complex acc = coef[n];
        for (std::size_t k = n; k-- > 0;) acc = acc * x + coef[k];
        return acc;
    };
    for (std::size_t it = 0; it < iters; ++it) {
        double maxStep = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Complex denom = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) denom *= z[i] - z[j];
            if (std::abs(denom) == 0.0) continue;
            const Complex step = eval(z[i]) / denom;
            z[i] -= step;
            maxStep = std::max(maxStep, std::abs(step));
        }
        if (maxStep < 1e-14 * radius) break;
    }
    return z;
}

/// True when the two multisets match within tol (greedy matching).
inline bool matchesAsMultiset(std::vector<Complex> a, std::vector<Complex> b, double tol) {
    if (a.size() != b.size()) return false;
    for (const Complex& x : a) {
        double best = tol;
        std::size_t bestIdx = b.size();
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = std::abs(x - b[j]);
            if (d <= best) {
                best = d;
                bestIdx = j;
            }
        }
        if (bestIdx == b.size()) return false;
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(bestIdx));
    }
    return true;
}

}  // namespace testutil
