#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "nildist/flag.hpp"
#include "nildist/matcore.hpp"
#include "nildist/matrix.hpp"

namespace nildist {

/// An upper bound on the nilpotent distance together with the evidence:
/// the flag that produced it, an explicit near-nilpotent certificate N,
/// and the diagnostics that make the bound checkable by direct evaluation.
struct CertifiedUpperBound {
    double value = 0.0;
    PartialFlag flag;     // complete flags carry unit ranks
    CMatrix certificate;  // N with ||A - N|| = value + residual
    double residual = 0.0;
    double nilpotencyDefect = 0.0;
};

namespace detail {

inline void requireSameDim(const CMatrix& a, const CMatrix& basis, const char* who) {
    if (a.dim() != basis.dim()) throw InputError(std::string(who) + ": dimension mismatch");
}

/// Corner norms of the rotated matrix for the block grid `ranks`:
/// entry k is the norm of rows r_k.. x columns ..r_{k+1} of basis* A basis.
inline std::vector<double> cornerNormsRotated(const CMatrix& rotated,
                                              const std::vector<std::size_t>& ranks) {
    const std::size_t d = rotated.dim();
    std::vector<double> out;
    out.reserve(ranks.size() - 1);
    for (std::size_t k = 1; k < ranks.size(); ++k) {
        const std::size_t rPrev = ranks[k - 1];
        const std::size_t rCur = ranks[k];
        if (rPrev >= d || rCur == 0) {
            out.push_back(0.0);
            continue;
        }
        out.push_back(operatorNorm(rotated.block(rPrev, 0, d - rPrev, rCur)));
    }
    return out;
}

}  // namespace detail

/// The n quantities || P_{k-1}^perp A P_k ||, computed as norms of the
/// lower-left submatrices of A rotated into the flag basis.
inline std::vector<double> cornerNorms(const CMatrix& a, const Flag& flag) {
    detail::requireSameDim(a, flag.basis, "cornerNorms");
    const CMatrix rotated = flag.basis.adjoint() * (a * flag.basis);
    std::vector<std::size_t> ranks(a.dim() + 1);
    for (std::size_t k = 0; k <= a.dim(); ++k) ranks[k] = k;
    return detail::cornerNormsRotated(rotated, ranks);
}

/// max_k || P_{k-1}^perp A P_k ||: the distance from A to the nilpotents
/// compatible with this flag (attained by nearestFlagNilpotent).
inline double flagObjective(const CMatrix& a, const Flag& flag) {
    const auto corners = cornerNorms(a, flag);
    double m = 0.0;
    for (double c : corners) m = std::max(m, c);
    return m;
}

inline std::vector<double> partialCornerNorms(const CMatrix& a, const PartialFlag& pflag) {
    detail::requireSameDim(a, pflag.basis, "partialFlagObjective");
    validateRanks(pflag);
    const CMatrix rotated = pflag.basis.adjoint() * (a * pflag.basis);
    return detail::cornerNormsRotated(rotated, pflag.ranks);
}

/// max_k || P_{k-1}^perp A P_k || over a chain of length n; upper-bounds the
/// distance from A to { N : N^n = 0 }.
inline double partialFlagObjective(const CMatrix& a, const PartialFlag& pflag) {
    const auto corners = partialCornerNorms(a, pflag);
    double m = 0.0;
    for (double c : corners) m = std::max(m, c);
    return m;
}

struct ParrottResult {
    CMatrix x;
    double gamma = 0.0;
};

/// Norm-minimal completion of the upper-right block X in
/// [[A11, X], [A21, A22]]. Central Davis-Kahan-Weinberger solution at a
/// level lifted infinitesimally above gamma so the half-inverses stay
/// bounded; the achieved norm is within 1e-9 * (1 + gamma) of gamma.
inline ParrottResult parrottMin(const CMatrix& a11, const CMatrix& a21, const CMatrix& a22) {
    if (a11.cols() != a21.cols() || a21.rows() != a22.rows())
        throw InputError("parrottMin: incompatible block shapes");
    const std::size_t p = a11.rows();
    const std::size_t s = a22.cols();

    const double gamma = std::max(operatorNorm(vstack(a11, a21)), operatorNorm(hstack(a21, a22)));
    if (gamma == 0.0 || p == 0 || s == 0) return {CMatrix(p, s), gamma};

    const double lift = gamma * (1.0 + 1e-11);
    const double level2 = lift * lift;

    // W solves (level^2 - A21 A21*)^(1/2) W = A22.
    const std::size_t r = a21.rows();
    const std::size_t q = a21.cols();
    CMatrix s2 = CMatrix::identity(r) * level2 - a21 * a21.adjoint();
    CMatrix t2 = CMatrix::identity(q) * level2 - a21.adjoint() * a21;
    const HermitianEig se = hermitianEig(s2.hermitianPart());
    const HermitianEig te = hermitianEig(t2.hermitianPart());
    const double floor = level2 * 1e-14;
    const auto invSqrt = [floor](double lam) { return 1.0 / std::sqrt(std::max(lam, floor)); };
    const CMatrix w = detail::hermitianApply(se, invSqrt) * a22;
    const CMatrix v = a11 * detail::hermitianApply(te, invSqrt);

    CMatrix x = v * a21.adjoint() * w;
    x *= Complex(-1.0, 0.0);
    return {std::move(x), gamma};
}

namespace detail {

/// Fill the free block-strictly-upper entries of E (initially the rotated
/// matrix) one block superdiagonal at a time with Parrott completions.
/// After the call, Ahat - E restricted to the allowed pattern is the
/// certificate in rotated coordinates and ||E|| <= max corner + slack.
inline void completeMinimalError(CMatrix& e, const std::vector<std::size_t>& ranks,
                                 double certTol) {
    const std::size_t d = e.dim();
    const std::size_t nb = ranks.size() - 1;
    for (std::size_t bd = 1; bd < nb; ++bd) {
        for (std::size_t bi = 0; bi + bd < nb; ++bi) {
            const std::size_t bj = bi + bd;
            const std::size_t r0 = ranks[bi], r1 = ranks[bi + 1];
            const std::size_t c0 = ranks[bj], c1 = ranks[bj + 1];
            if (r1 == r0 || c1 == c0) continue;  // empty block
            const CMatrix a11 = e.block(r0, 0, r1 - r0, c0);
            const CMatrix a21 = e.block(r1, 0, d - r1, c0);
            const CMatrix a22 = e.block(r1, c0, d - r1, c1 - c0);
            const ParrottResult pr = parrottMin(a11, a21, a22);
            e.setBlock(r0, c0, pr.x);
            const double got = operatorNorm(e.block(r0, 0, d - r0, c1));
            if (got > pr.gamma + certTol * (1.0 + pr.gamma))
                throw NumericalError("completion failure at block superdiagonal " +
                                     std::to_string(bd) + ", step " + std::to_string(bi) +
                                     ": norm " + std::to_string(got) + " exceeds level " +
                                     std::to_string(pr.gamma));
        }
    }
}

inline CertifiedUpperBound nearestNilpotentImpl(const CMatrix& a, PartialFlag pflag,
                                                double certTol) {
    validateRanks(pflag);
    const std::size_t d = a.dim();
    const CMatrix rotated = pflag.basis.adjoint() * (a * pflag.basis);
    const auto corners = cornerNormsRotated(rotated, pflag.ranks);
    double objective = 0.0;
    for (double c : corners) objective = std::max(objective, c);

    CMatrix e = rotated;
    completeMinimalError(e, pflag.ranks, certTol);

    // Certificate: the filled strictly-upper pattern, exactly zero elsewhere.
    CMatrix ntil(d, d);
    const std::size_t nb = pflag.ranks.size() - 1;
    for (std::size_t bi = 0; bi < nb; ++bi) {
        for (std::size_t bj = bi + 1; bj < nb; ++bj) {
            const std::size_t r0 = pflag.ranks[bi], r1 = pflag.ranks[bi + 1];
            const std::size_t c0 = pflag.ranks[bj], c1 = pflag.ranks[bj + 1];
            for (std::size_t i = r0; i < r1; ++i)
                for (std::size_t j = c0; j < c1; ++j) ntil(i, j) = rotated(i, j) - e(i, j);
        }
    }

    CertifiedUpperBound out;
    out.value = objective;
    out.certificate = pflag.basis * ntil * pflag.basis.adjoint();
    out.residual = std::abs(operatorNorm(a - out.certificate) - objective);
    out.nilpotencyDefect = partialFlagObjective(out.certificate, pflag);
    out.flag = std::move(pflag);
    if (out.residual > certTol * (1.0 + operatorNorm(a)))
        throw NumericalError("nearestFlagNilpotent: residual " + std::to_string(out.residual) +
                             " exceeds certification tolerance");
    return out;
}

}  // namespace detail

/// Explicit nilpotent compatible with the flag at distance flagObjective(A, flag)
/// from A (up to certTol * (1 + ||A||)).
inline CertifiedUpperBound nearestFlagNilpotent(const CMatrix& a, const Flag& flag,
                                                double certTol = 1e-8) {
    detail::requireSameDim(a, flag.basis, "nearestFlagNilpotent");
    return detail::nearestNilpotentImpl(a, PartialFlag::fromFlag(flag), certTol);
}

/// Same construction on a partial flag: the certificate N satisfies N^n = 0
/// for n the chain length.
inline CertifiedUpperBound nearestPartialFlagNilpotent(const CMatrix& a, const PartialFlag& pflag,
                                                       double certTol = 1e-8) {
    detail::requireSameDim(a, pflag.basis, "nearestPartialFlagNilpotent");
    return detail::nearestNilpotentImpl(a, pflag, certTol);
}

/// The Schur-triangulation upper bound: N = U strictUpper(T) U*, so
/// A - N = U diag(T) U* and the distance achieved equals the spectral radius.
inline CertifiedUpperBound schurUpperBound(const CMatrix& a, double certTol = 1e-8) {
    const SchurResult s = schurForm(a);
    const std::size_t n = a.dim();
    CMatrix strict = s.t;
    for (std::size_t i = 0; i < n; ++i) strict(i, i) = 0.0;

    CertifiedUpperBound out;
    out.flag = PartialFlag::fromFlag(Flag{s.u});
    out.certificate = s.u * strict * s.u.adjoint();
    out.value = flagObjective(a, Flag{s.u});  // = max |T_kk|
    out.residual = std::abs(operatorNorm(a - out.certificate) - out.value);
    out.nilpotencyDefect = partialFlagObjective(out.certificate, out.flag);
    if (out.residual > certTol * (1.0 + operatorNorm(a)))
        throw NumericalError("schurUpperBound: residual exceeds certification tolerance");
    return out;
}

}  // namespace nildist
