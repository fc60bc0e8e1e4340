#pragma once

#include <cstddef>
#include <vector>

#include "nildist/decomp.hpp"
#include "nildist/matrix.hpp"

namespace nildist {

/// Complete chain of projections P_0 < P_1 < ... < P_n encoded as a single
/// unitary: P_k projects onto the span of the first k basis columns. The
/// chain property holds by construction, so rounding cannot break it.
struct Flag {
    CMatrix basis;

    std::size_t dim() const { return basis.dim(); }

    static Flag standard(std::size_t n) { return {CMatrix::identity(n)}; }
};

/// Chain 0 = P_0 <= P_1 <= ... <= P_n = I of arbitrary length n in ambient
/// dimension d; P_k projects onto the first ranks[k] basis columns.
struct PartialFlag {
    CMatrix basis;
    std::vector<std::size_t> ranks;  // ranks[0] = 0, nondecreasing, back() = d

    std::size_t ambientDim() const { return basis.dim(); }
    std::size_t length() const { return ranks.empty() ? 0 : ranks.size() - 1; }

    bool isComplete() const {
        if (length() != ambientDim()) return false;
        for (std::size_t k = 0; k < ranks.size(); ++k)
            if (ranks[k] != k) return false;
        return true;
    }

    static PartialFlag fromFlag(const Flag& f) {
        PartialFlag p;
        p.basis = f.basis;
        p.ranks.resize(f.dim() + 1);
        for (std::size_t k = 0; k <= f.dim(); ++k) p.ranks[k] = k;
        return p;
    }
};

inline bool isUnitary(const CMatrix& u, double tol = 1e-10) {
    if (!u.isSquare()) return false;
    const CMatrix g = u.adjoint() * u;
    double worst = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i)
        for (std::size_t j = 0; j < u.dim(); ++j) {
            const Complex expect = i == j ? Complex(1.0) : Complex(0.0);
            worst = std::max(worst, std::abs(g(i, j) - expect));
        }
    return worst <= tol;
}

inline void validateRanks(const PartialFlag& p) {
    if (p.ranks.empty() || p.ranks.front() != 0 || p.ranks.back() != p.ambientDim())
        throw InputError("PartialFlag: ranks must run from 0 to the ambient dimension");
    for (std::size_t k = 1; k < p.ranks.size(); ++k)
        if (p.ranks[k] < p.ranks[k - 1]) throw InputError("PartialFlag: ranks must be nondecreasing");
}

}  // namespace nildist
