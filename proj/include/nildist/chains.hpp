#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "nildist/flag.hpp"
#include "nildist/matcore.hpp"
#include "nildist/matrix.hpp"

namespace nildist {

/// Nondecreasing weights 0 = c_0 <= c_1 <= ... <= c_n = 1 parameterizing the
/// chains c_k Q through a rank-one projection Q.
struct ScalarChain {
    std::vector<double> c;  // size n + 1

    std::size_t length() const { return c.empty() ? 0 : c.size() - 1; }
};

inline void validateScalarChain(const ScalarChain& chain) {
    if (chain.c.size() < 2) throw InputError("ScalarChain: need at least c_0 and c_1");
    if (std::abs(chain.c.front()) > 1e-12 || std::abs(chain.c.back() - 1.0) > 1e-12)
        throw InputError("ScalarChain: endpoints must be 0 and 1");
    for (std::size_t k = 0; k < chain.c.size(); ++k) {
        if (chain.c[k] < -1e-12 || chain.c[k] > 1.0 + 1e-12)
            throw InputError("ScalarChain: entries must lie in [0, 1]");
        if (k > 0 && chain.c[k] < chain.c[k - 1] - 1e-12)
            throw InputError("ScalarChain: entries must be nondecreasing");
    }
}

/// max_k sqrt(c_k (1 - c_{k-1})), the chain's distance objective.
inline double scalarChainValue(const ScalarChain& chain) {
    validateScalarChain(chain);
    double best = 0.0;
    for (std::size_t k = 1; k < chain.c.size(); ++k) {
        const double term = chain.c[k] * (1.0 - chain.c[k - 1]);
        best = std::max(best, std::sqrt(std::max(term, 0.0)));
    }
    return best;
}

/// Greedy feasibility for level v: push every c_k as high as the level
/// allows; the level is achievable iff the last weight reaches 1.
inline bool scalarChainFeasible(std::size_t n, double v) {
    const double v2 = v * v;
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (c >= 1.0) return true;  // remaining constraints are slack
        c = std::min(1.0, v2 / (1.0 - c));
    }
    return c >= 1.0;
}

struct ScalarChainSolution {
    double value = 1.0;
    ScalarChain chain;
};

/// Bisection on the level v over [0, 1] with the greedy feasibility check.
inline ScalarChainSolution solveScalarChain(std::size_t n, double tol = 1e-12) {
    if (n == 0) throw InputError("solveScalarChain: n must be positive");
    if (tol <= 0.0) throw InputError("solveScalarChain: tol must be positive");
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket exhausted in double precision
        if (scalarChainFeasible(n, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ScalarChainSolution out;
    out.value = hi;
    out.chain.c.assign(n + 1, 0.0);
    const double v2 = hi * hi;
    for (std::size_t k = 1; k <= n; ++k) {
        const double prev = out.chain.c[k - 1];
        out.chain.c[k] = prev >= 1.0 ? 1.0 : std::min(1.0, v2 / (1.0 - prev));
    }
    out.chain.c[n] = 1.0;
    return out;
}

/// Exact distance from a rank-one projection in dimension n to the
/// nilpotents: (1/2) sec(pi / (n + 2)).
inline double macdonaldValue(std::size_t n) {
    if (n == 0) throw InputError("macdonaldValue: n must be positive");
    return 0.5 / std::cos(std::numbers::pi / (static_cast<double>(n) + 2.0));
}

/// Conjectured distance for a rank-m projection: (1/2) sec(pi / (n/m + 2)).
/// Proven for m = 1, m = n - 1; trivial for m = n.
inline double cramerValue(std::size_t n, std::size_t m) {
    if (n == 0 || m == 0 || m > n) throw InputError("cramerValue: need 1 <= m <= n");
    const double ratio = static_cast<double>(n) / static_cast<double>(m);
    return 0.5 / std::cos(std::numbers::pi / (ratio + 2.0));
}

/// Rank-refined lower bound (1/2) sec(pi / (n - m + 3)) for matrices
/// carried by a rank-m projection with expansive restriction.
inline double theorem1Bound(std::size_t n, std::size_t m) {
    if (n == 0 || m == 0 || m > n) throw InputError("theorem1Bound: need 1 <= m <= n");
    return macdonaldValue(n - m + 1);
}

struct BoundTable {
    std::size_t n = 0;
    std::size_t m = 0;
    double macdonald = 0.0;
    double cramer = 0.0;
    double theorem1 = 0.0;
};

inline BoundTable boundTable(std::size_t n, std::size_t m) {
    return {n, m, macdonaldValue(n), cramerValue(n, m), theorem1Bound(n, m)};
}

/// Chain of PSD matrices 0 = A_0 <= A_1 <= ... <= A_n = A with rank-one
/// increments.
struct PsdChain {
    std::vector<CMatrix> matrices;  // A_0 .. A_n

    std::size_t length() const { return matrices.empty() ? 0 : matrices.size() - 1; }
};

namespace detail {

struct ChainCheck {
    double normTop = 0.0;
    HermitianCheckTolerance tol;
};

inline ChainCheck validatePsdChain(const CMatrix& top, const PsdChain& chain,
                                   double rankTolFactor) {
    if (chain.matrices.size() < 2) throw InputError("PsdChain: need A_0 and A_1");
    const std::size_t n = top.dim();
    for (const CMatrix& m : chain.matrices)
        if (m.dim() != n) throw InputError("PsdChain: dimension mismatch");
    const double normTop = operatorNorm(top);
    if (chain.matrices.front().maxAbs() > 1e-10 * std::max(1.0, normTop))
        throw InputError("PsdChain: A_0 must vanish");
    if (operatorNorm(chain.matrices.back() - top) > 1e-8 * std::max(1.0, normTop))
        throw InputError("PsdChain: chain top differs from A");
    const double psdTol = 1e-10 * std::max(1.0, normTop);
    for (std::size_t k = 1; k < chain.matrices.size(); ++k) {
        const CMatrix inc = chain.matrices[k] - chain.matrices[k - 1];
        const HermitianEig eig = hermitianEig(inc.hermitianPart());
        if (eig.values.front() < -psdTol)
            throw NumericalError("PsdChain: increment " + std::to_string(k) +
                                 " is not PSD within tolerance");
        if (rankTolFactor > 0.0) {
            const auto sv = singularValues(inc);
            if (sv.size() > 1 && sv[1] > rankTolFactor * std::max(1.0, normTop))
                throw InputError("PsdChain: increment " + std::to_string(k) +
                                 " has rank above one");
        }
    }
    ChainCheck out;
    out.normTop = normTop;
    out.tol.hermTol = 1e-8 * std::max(1.0, normTop);
    out.tol.psdTol = psdTol;
    return out;
}

}  // namespace detail

/// max_k || (A - A_{k-1})^(1/2) A_k^(1/2) ||.
inline double psdChainObjective(const CMatrix& a, const PsdChain& chain) {
    const auto check = detail::validatePsdChain(a, chain, 1e-8);
    double best = 0.0;
    for (std::size_t k = 1; k < chain.matrices.size(); ++k) {
        const CMatrix left = psdSqrt(a - chain.matrices[k - 1], check.tol);
        const CMatrix right = psdSqrt(chain.matrices[k], check.tol);
        best = std::max(best, operatorNorm(left * right));
    }
    return best;
}

/// max_k || (A - A_{k-1})^(1/2) (X A_k X*)^(1/2) ||; X = I recovers
/// psdChainObjective.
inline double conjugatedChainObjective(const CMatrix& a, const CMatrix& x,
                                       const PsdChain& chain) {
    if (x.dim() != a.dim()) throw InputError("conjugatedChainObjective: dimension mismatch");
    const auto check = detail::validatePsdChain(a, chain, 1e-8);
    HermitianCheckTolerance conjTol = check.tol;
    const double nx = operatorNorm(x);
    conjTol.hermTol = *check.tol.hermTol * std::max(1.0, nx * nx);
    conjTol.psdTol = *check.tol.psdTol * std::max(1.0, nx * nx);
    double best = 0.0;
    for (std::size_t k = 1; k < chain.matrices.size(); ++k) {
        const CMatrix left = psdSqrt(a - chain.matrices[k - 1], check.tol);
        const CMatrix conj = x * chain.matrices[k] * x.adjoint();
        const CMatrix right = psdSqrt(conj, conjTol);
        best = std::max(best, operatorNorm(left * right));
    }
    return best;
}

/// The chain A_k = A^(1/2) P_k A^(1/2) induced by a flag; its objective
/// reproduces the flag's corner norms.
inline PsdChain chainFromFlag(const CMatrix& a, const Flag& flag) {
    if (a.dim() != flag.dim()) throw InputError("chainFromFlag: dimension mismatch");
    const std::size_t n = a.dim();
    const CMatrix s = psdSqrt(a);
    PsdChain chain;
    chain.matrices.reserve(n + 1);
    chain.matrices.push_back(CMatrix(n, n));
    for (std::size_t k = 1; k <= n; ++k) {
        const CMatrix bk = s * flag.basis.block(0, 0, n, k);
        chain.matrices.push_back(bk * bk.adjoint());
    }
    return chain;
}

/// Projects each increment onto its leading rank-one part and tops up
/// degenerate directions with eps-weighted orthogonal fills so the chain top
/// becomes full rank; the executable version of the density perturbation.
inline PsdChain perturbToRankOneChain(const PsdChain& chain, double eps = -1.0) {
    if (chain.matrices.size() < 2) throw InputError("perturbToRankOneChain: empty chain");
    const std::size_t n = chain.matrices.front().dim();
    const std::size_t steps = chain.matrices.size() - 1;
    const double scale = std::max(operatorNorm(chain.matrices.back()), 1e-30);
    if (eps < 0.0) eps = 1e-6 * scale;

    std::vector<CMatrix> dirs;  // orthonormal columns accepted so far
    auto residual = [&](const CMatrix& w) {
        CMatrix r = w;
        for (const CMatrix& q : dirs) {
            Complex dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += std::conj(q(i, 0)) * r(i, 0);
            for (std::size_t i = 0; i < n; ++i) r(i, 0) -= dot * q(i, 0);
        }
        return r;
    };

    std::vector<CMatrix> w(steps, CMatrix(n, 1));
    for (std::size_t k = 0; k < steps; ++k) {
        const CMatrix inc = (chain.matrices[k + 1] - chain.matrices[k]).hermitianPart();
        const HermitianEig eig = hermitianEig(inc);
        const double lam = eig.values.back();
        if (lam > 0.0) {
            for (std::size_t i = 0; i < n; ++i)
                w[k](i, 0) = std::sqrt(lam) * eig.vectors(i, n - 1);
        }
        CMatrix r = residual(w[k]);
        double rn = 0.0;
        for (std::size_t i = 0; i < n; ++i) rn += std::norm(r(i, 0));
        rn = std::sqrt(rn);
        if (rn > std::sqrt(eps * scale) * 0.5) {
            for (std::size_t i = 0; i < n; ++i) r(i, 0) /= rn;
            dirs.push_back(r);
            continue;
        }
        // Degenerate direction: add an eps-weighted orthogonal fill.
        for (std::size_t cand = 0; cand < n; ++cand) {
            CMatrix basisVec(n, 1);
            basisVec(cand, 0) = 1.0;
            CMatrix q = residual(basisVec);
            double qn = 0.0;
            for (std::size_t i = 0; i < n; ++i) qn += std::norm(q(i, 0));
            qn = std::sqrt(qn);
            if (qn > 0.25) {
                for (std::size_t i = 0; i < n; ++i) q(i, 0) /= qn;
                for (std::size_t i = 0; i < n; ++i) w[k](i, 0) += std::sqrt(eps * scale) * q(i, 0);
                dirs.push_back(q);
                break;
            }
        }
    }

    PsdChain out;
    out.matrices.reserve(steps + 1);
    CMatrix acc(n, n);
    out.matrices.push_back(acc);
    for (std::size_t k = 0; k < steps; ++k) {
        acc += w[k] * w[k].adjoint();
        out.matrices.push_back(acc);
    }
    return out;
}

/// Flag with projections P_k = B^(-1/2) B_k B^(-1/2) built from a rank-one
/// chain whose top B has full rank. Requires strict rank-one increments; a
/// degenerate chain should first go through perturbToRankOneChain.
inline Flag chainToFlag(const PsdChain& chain) {
    if (chain.matrices.size() < 2) throw InputError("chainToFlag: empty chain");
    const std::size_t n = chain.matrices.front().dim();
    if (chain.length() != n)
        throw InputError("chainToFlag: chain length must equal the dimension");
    const CMatrix& top = chain.matrices.back();
    const double normTop = operatorNorm(top);
    detail::validatePsdChain(top, chain, 0.0);

    // Increments must have rank exactly one (checked before the top so a
    // repeated chain entry reports the right precondition).
    std::vector<HermitianEig> incEigs;
    incEigs.reserve(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const CMatrix inc = (chain.matrices[k] - chain.matrices[k - 1]).hermitianPart();
        const auto sv = singularValues(inc);
        if (sv[0] <= 1e-10 * normTop)
            throw InputError("chainToFlag: increment " + std::to_string(k) +
                             " vanishes; rank must be exactly one");
        if (sv.size() > 1 && sv[1] > 1e-10 * normTop)
            throw InputError("chainToFlag: increment " + std::to_string(k) +
                             " has rank above one");
        incEigs.push_back(hermitianEig(inc));
    }

    const HermitianEig topEig = hermitianEig(top.hermitianPart());
    if (topEig.values.front() < 1e-8 * normTop)
        throw NumericalError(
            "chainToFlag: chain top is rank deficient; perturb the chain first "
            "(perturbToRankOneChain)");
    const CMatrix invSqrt = detail::hermitianApply(
        topEig, [&](double lam) { return 1.0 / std::sqrt(std::max(lam, 1e-14 * normTop)); });

    CMatrix directions(n, n);
    for (std::size_t k = 1; k <= n; ++k) {
        const HermitianEig& eig = incEigs[k - 1];
        const double lam = eig.values.back();
        const CMatrix w = eig.vectors.block(0, n - 1, n, 1) * std::sqrt(std::max(lam, 0.0));
        directions.setBlock(0, k - 1, invSqrt * w);
    }
    QrResult qr = householderQr(directions);
    return {std::move(qr.q)};
}

/// For Q = e e*, a flag achieving the MacDonald value: map e onto the
/// vector of optimal chain increments sqrt(c_j - c_{j-1}) with a
/// Householder-type unitary and use its adjoint as the basis.
inline Flag optimalRankOneFlag(std::size_t n, const CMatrix& e, double tol = 1e-12) {
    if (e.rows() != n || e.cols() != 1) throw InputError("optimalRankOneFlag: e must be n x 1");
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(e(i, 0));
    if (std::abs(std::sqrt(nrm) - 1.0) > 1e-12)
        throw InputError("optimalRankOneFlag: e must be a unit vector");

    const ScalarChainSolution sol = solveScalarChain(n, tol);
    CMatrix s(n, 1);
    double snorm = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
        const double inc = std::max(sol.chain.c[j] - sol.chain.c[j - 1], 0.0);
        s(j - 1, 0) = std::sqrt(inc);
        snorm += inc;
    }
    snorm = std::sqrt(snorm);
    for (std::size_t j = 0; j < n; ++j) s(j, 0) /= snorm;

    // Unitary W with W e = s: phase-align, then reflect.
    Complex mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += s(i, 0) * e(i, 0);  // s real
    const Complex ph = std::abs(mu) > 0.0 ? mu / std::abs(mu) : Complex(1.0);
    CMatrix u(n, 1);
    double uu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        u(i, 0) = std::conj(ph) * e(i, 0) - s(i, 0);
        uu += std::norm(u(i, 0));
    }
    CMatrix w = CMatrix::identity(n);
    if (uu > 1e-30) {
        const double scale = 2.0 / uu;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                w(i, j) -= scale * u(i, 0) * std::conj(u(j, 0));
    }
    w *= std::conj(ph);
    return {w.adjoint()};
}

}  // namespace nildist
