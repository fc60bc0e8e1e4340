#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "nildist/decomp.hpp"
#include "nildist/matrix.hpp"
#include "nildist/rng.hpp"

namespace nildist {

/// Tolerances for Hermitian functional calculus. Empty fields select
/// scale-relative defaults: hermTol = 1e-10 * max(1, ||A||_F) and
/// psdTol = 1e-10 * max |eigenvalue|.
struct HermitianCheckTolerance {
    std::optional<double> hermTol;
    std::optional<double> psdTol;
};

namespace detail {

inline void requireFinite(const CMatrix& a, const char* who) {
    if (!a.isFinite()) throw InputError(std::string(who) + ": non-finite entries");
}

constexpr std::size_t kDenseSvdLimit = 64;

/// Largest eigenvalue of the PSD Gram matrix of a via power iteration.
inline double gramPowerIteration(const CMatrix& a, double tol, std::size_t maxIter) {
    const CMatrix b = a.rows() <= a.cols() ? a * a.adjoint() : a.adjoint() * a;
    const std::size_t n = b.rows();
    Rng rng(0x9d5fu);
    std::vector<Complex> v(n);
    double nrm = 0.0;
    for (auto& x : v) {
        x = rng.complexGaussian();
        nrm += std::norm(x);
    }
    nrm = std::sqrt(nrm);
    for (auto& x : v) x /= nrm;

    double lambda = 0.0;
    std::vector<Complex> w(n);
    for (std::size_t it = 0; it < maxIter; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            Complex s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += b(i, j) * v[j];
            w[i] = s;
        }
        double wn = 0.0;
        for (const auto& x : w) wn += std::norm(x);
        wn = std::sqrt(wn);
        if (wn == 0.0) return 0.0;
        const double lambdaNew = wn;  // ||Bv|| with ||v|| = 1
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
        if (std::abs(lambdaNew - lambda) <= tol * std::max(1.0, lambdaNew)) return lambdaNew;
        lambda = lambdaNew;
    }
    return lambda;
}

/// Apply a real function to the spectrum of a Hermitian matrix.
template <typename Fn>
CMatrix hermitianApply(const HermitianEig& eig, Fn f) {
    const std::size_t n = eig.vectors.dim();
    CMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double fk = f(eig.values[k]);
        if (fk == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const Complex vik = eig.vectors(i, k);
            if (vik == Complex(0.0)) continue;
            const Complex scaled = fk * vik;
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) += scaled * std::conj(eig.vectors(j, k));
        }
    }
    return out;
}

}  // namespace detail

/// Largest singular value. Dense Jacobi SVD at desk scale, power iteration
/// on the Gram matrix above kDenseSvdLimit.
inline double operatorNorm(const CMatrix& a) {
    detail::requireFinite(a, "operatorNorm");
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    if (std::max(a.rows(), a.cols()) <= detail::kDenseSvdLimit) {
        return singularValues(a)[0];
    }
    return std::sqrt(detail::gramPowerIteration(a, 1e-12, 10000));
}

/// Maximum eigenvalue modulus, from the Schur diagonal.
inline double spectralRadius(const CMatrix& a) {
    detail::requireFinite(a, "spectralRadius");
    const SchurResult s = schurDecompose(a);
    double rho = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) rho = std::max(rho, std::abs(s.t(i, i)));
    return rho;
}

/// Schur triangulation A = U T U*.
inline SchurResult schurForm(const CMatrix& a) {
    detail::requireFinite(a, "schurForm");
    return schurDecompose(a);
}

/// Positive square root of a (nearly) PSD Hermitian matrix. Eigenvalues in
/// [-psdTol, 0) are clamped to zero; anything below -psdTol is an error.
inline CMatrix psdSqrt(const CMatrix& a, const HermitianCheckTolerance& tol = {}) {
    detail::requireFinite(a, "psdSqrt");
    const std::size_t n = a.dim();
    const double hermTol =
        tol.hermTol ? *tol.hermTol : 1e-10 * std::max(1.0, a.frobeniusNorm());
    if (hermTol < 0.0) throw InputError("psdSqrt: hermTol must be nonnegative");
    const double asym = operatorNorm(a - a.adjoint());
    if (asym > hermTol)
        throw InputError("psdSqrt: matrix is not Hermitian within tolerance (defect " +
                         std::to_string(asym) + ")");
    const CMatrix h = a.hermitianPart();
    const HermitianEig eig = hermitianEig(h);
    double top = 0.0;
    for (double lam : eig.values) top = std::max(top, std::abs(lam));
    const double psdTol = tol.psdTol ? *tol.psdTol : 1e-10 * top;
    if (psdTol < 0.0) throw InputError("psdSqrt: psdTol must be nonnegative");
    if (n > 0 && eig.values[0] < -psdTol)
        throw NumericalError("psdSqrt: matrix is not PSD (min eigenvalue " +
                             std::to_string(eig.values[0]) + ")");
    // Eigenvalues inside the [-psdTol, psdTol] band are roundoff from
    // subtractive constructions; sqrt would amplify them to sqrt(noise).
    CMatrix s = detail::hermitianApply(
        eig, [psdTol](double lam) { return lam > psdTol ? std::sqrt(lam) : 0.0; });
    return s.hermitianPart();
}

/// Haar-distributed random unitary drawn from an existing stream: complex
/// Ginibre sample, QR, then the R-diagonal phase normalization.
inline CMatrix haarUnitaryFromRng(Rng& rng, std::size_t n) {
    if (n == 0) throw InputError("haarUnitary: n must be positive");
    const CMatrix g = rng.ginibre(n, n);
    QrResult qr = householderQr(g);
    CMatrix u = std::move(qr.q);
    for (std::size_t j = 0; j < n; ++j) {
        const Complex rjj = qr.r(j, j);
        const double mag = std::abs(rjj);
        const Complex phase = mag > 0.0 ? rjj / mag : Complex(1.0);
        for (std::size_t i = 0; i < n; ++i) u(i, j) *= phase;
    }
    return u;
}

/// Deterministic in the seed.
inline CMatrix haarUnitary(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return haarUnitaryFromRng(rng, n);
}

/// Result of the kernel-chain staircase used to certify nilpotency: a
/// unitary basis in which the matrix is block strictly upper triangular,
/// with the cumulative block ranks and the achieved corner defect.
struct StaircaseForm {
    bool complete = false;        // kernel chain exhausted the space
    CMatrix basis;                // unitary when complete
    std::vector<std::size_t> ranks;  // 0 = r_0 < r_1 < ... <= n
    double defect = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double blockCornerDefect(const CMatrix& a, const CMatrix& basis,
                                const std::vector<std::size_t>& ranks) {
    const std::size_t n = a.dim();
    const CMatrix rotated = basis.adjoint() * (a * basis);
    double defect = 0.0;
    for (std::size_t k = 1; k < ranks.size(); ++k) {
        const std::size_t rPrev = ranks[k - 1];
        const std::size_t rCur = ranks[k];
        if (rPrev >= n || rCur == 0) continue;
        defect = std::max(defect, operatorNorm(rotated.block(rPrev, 0, n - rPrev, rCur)));
    }
    return defect;
}

}  // namespace detail

/// Kernel-chain staircase of A at threshold tau: columns are grouped so that
/// block j maps (within tau per column) into blocks strictly before it. When
/// the chain exhausts C^n this exhibits A as within ~sqrt(n)*tau of a
/// nilpotent matrix. With forcePeel the smallest singular direction is
/// deflated even when it exceeds tau, so the chain always completes and the
/// final corner defect carries the verdict.
inline StaircaseForm staircaseForm(const CMatrix& a, double tau, bool forcePeel = false) {
    const std::size_t n = a.dim();
    StaircaseForm out;
    out.basis = CMatrix(n, n);
    out.ranks.push_back(0);

    CMatrix active = CMatrix::identity(n);  // n x s complement basis
    std::size_t filled = 0;
    while (active.cols() > 0) {
        const CMatrix compressed = active.adjoint() * (a * active);
        const Svd svd = jacobiSvd(compressed);
        const std::size_t s = active.cols();
        std::size_t kdim = 0;
        for (std::size_t j = 0; j < s; ++j)
            if (svd.sigma[j] <= tau) ++kdim;
        if (kdim == 0) {
            if (!forcePeel) return out;  // chain stuck: not nilpotent at this tolerance
            kdim = 1;
        }
        // Kernel directions are the trailing right-singular vectors.
        const CMatrix kernel = active * svd.v.block(0, s - kdim, s, kdim);
        out.basis.setBlock(0, filled, kernel);
        filled += kdim;
        out.ranks.push_back(filled);
        if (kdim == s) break;
        active = active * svd.v.block(0, 0, s, s - kdim);
    }

    out.defect = detail::blockCornerDefect(a, out.basis, out.ranks);
    out.complete = true;
    return out;
}

/// One-shot kernel chain from matrix powers: the tol-kernels of B, B^2, ...
/// for B = A / max(1, ||A||) grow to the full space iff A is close to a
/// nilpotent of some order. Every subspace comes from a single SVD of a
/// power, so rounding does not compound across deflation steps the way it
/// can in staircaseForm when a compression has a small spectral gap.
inline StaircaseForm powerKernelForm(const CMatrix& a, double tol) {
    const std::size_t n = a.dim();
    StaircaseForm out;
    out.basis = CMatrix(n, n);
    out.ranks.push_back(0);

    const double scale = std::max(1.0, operatorNorm(a));
    const CMatrix b = a * Complex(1.0 / scale, 0.0);
    CMatrix power = b;
    std::size_t filled = 0;
    for (std::size_t j = 1; j <= n && filled < n; ++j) {
        const Svd svd = jacobiSvd(power);
        std::size_t kd = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (svd.sigma[k] <= tol) ++kd;
        if (kd > filled) {
            // Orthonormal extension: residual of the kernel basis against
            // the committed columns, top directions by singular value.
            CMatrix kernel = svd.v.block(0, n - kd, n, kd);
            for (std::size_t c = 0; c < kd; ++c) {
                for (std::size_t prev = 0; prev < filled; ++prev) {
                    Complex dot = 0.0;
                    for (std::size_t r = 0; r < n; ++r)
                        dot += std::conj(out.basis(r, prev)) * kernel(r, c);
                    for (std::size_t r = 0; r < n; ++r)
                        kernel(r, c) -= dot * out.basis(r, prev);
                }
            }
            const Svd resid = jacobiSvd(kernel);
            const std::size_t extend = kd - filled;
            out.basis.setBlock(0, filled, resid.u.block(0, 0, n, extend));
            filled += extend;
            out.ranks.push_back(filled);
        }
        if (j < n && filled < n) power = power * b;
    }
    if (filled < n) return out;  // chain never exhausted the space
    out.defect = detail::blockCornerDefect(a, out.basis, out.ranks);
    out.complete = true;
    return out;
}

/// Numerical nilpotency: does some orthonormal basis exhibit A as strictly
/// (block) upper triangular up to tol * max(1, ||A||)? Decided with the
/// staircase form, falling back to the power-kernel chain when the
/// staircase is limited by an ill-conditioned compression. (Eigenvalues are
/// useless here: those of a rounded nilpotent spread over a disk of radius
/// ~eps^(1/n).)
inline bool isNilpotent(const CMatrix& a, double tol) {
    detail::requireFinite(a, "isNilpotent");
    if (tol < 0.0) throw InputError("isNilpotent: tol must be nonnegative");
    const std::size_t n = a.dim();
    const double scale = std::max(1.0, operatorNorm(a));
    const double tau = tol * scale / std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1)));
    const StaircaseForm sf = staircaseForm(a, tau, true);
    if (sf.complete && sf.defect <= tol * scale) return true;
    const StaircaseForm pf = powerKernelForm(a, tol);
    return pf.complete && pf.defect <= tol * scale;
}

}  // namespace nildist
