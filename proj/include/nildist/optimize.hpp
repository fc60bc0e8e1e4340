#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numbers>
#include <thread>
#include <vector>

#include "nildist/nestdist.hpp"

namespace nildist {

/// Budget and reproducibility knobs for the flag search.
struct SearchConfig {
    std::size_t restarts = 32;  // Haar starting flags per search
    std::size_t sweeps = 20;    // full Givens passes per restart
    std::size_t angleGrid = 8;  // rotation-angle and phase samples per pair
    double shrink = 0.5;        // grid-refinement factor per sweep
    std::uint64_t seed = 0;
    double certTol = 1e-8;

    void validate() const {
        if (restarts == 0 || sweeps == 0 || angleGrid == 0)
            throw InputError("SearchConfig: budgets must be positive");
        if (!(shrink > 0.0 && shrink < 1.0))
            throw InputError("SearchConfig: shrink must lie in (0, 1)");
        if (certTol <= 0.0) throw InputError("SearchConfig: certTol must be positive");
    }
};

/// Thread budget for data-parallel loops: NILDIST_THREADS if set, hardware
/// concurrency otherwise.
inline std::size_t threadCap() {
    if (const char* env = std::getenv("NILDIST_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Index-parallel loop with deterministic slot semantics: fn(i) must write
/// only to slot i of whatever it fills.
template <typename Fn>
void parallelFor(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

namespace detail {

/// Mutable state for coordinate descent over one (basis, ranks) pair:
/// the rotated matrix, its block corner norms, and scratch buffers sized
/// once. Candidate evaluation is bound-first: per-column/row lower bounds
/// and the Frobenius upper bound decide most candidates without an SVD.
class FlagSearch {
public:
    FlagSearch(const CMatrix& a, std::vector<std::size_t> ranks)
        : a_(&a), n_(a.dim()), ranks_(std::move(ranks)) {
        blockOf_.resize(n_);
        for (std::size_t b = 0; b + 1 < ranks_.size(); ++b)
            for (std::size_t c = ranks_[b]; c < ranks_[b + 1]; ++c) blockOf_[c] = b;
        cand_.resize(n_ * n_);
        blockBuf_.resize(n_ * n_);
        corners_.resize(ranks_.size() - 1);
        order_.resize(corners_.size());
    }

    void setBasis(CMatrix v) {
        basis_ = std::move(v);
        resync();
    }

    const CMatrix& basis() const { return basis_; }
    double objective() const { return objective_; }
    bool sameBlock(std::size_t i, std::size_t j) const { return blockOf_[i] == blockOf_[j]; }

    /// Recompute the rotated matrix and all corners exactly.
    void resync() {
        rot_ = basis_.adjoint() * (*a_ * basis_);
        recomputeCorners();
    }

    /// Exact objective of the candidate rotation on columns (i, j),
    /// provided it beats `threshold`; returns false (aborting early on
    /// norm bounds) otherwise.
    bool candidateBelow(std::size_t i, std::size_t j, double c, Complex ws, double threshold,
                        double& value) {
        const Complex* src = rot_.data();
        std::copy(src, src + n_ * n_, cand_.begin());
        applyRotation(cand_.data(), i, j, c, ws);

        const double thr2 = threshold * threshold;
        double candMax = 0.0;
        for (std::size_t idx : order_) {
            const std::size_t rowStart = ranks_[idx];
            const std::size_t colEnd = ranks_[idx + 1];
            if (rowStart >= n_ || colEnd == 0) continue;
            const std::size_t p = n_ - rowStart;
            double fro2 = 0.0, maxCol2 = 0.0;
            for (std::size_t cidx = 0; cidx < colEnd; ++cidx) {
                double col2 = 0.0;
                for (std::size_t r = 0; r < p; ++r)
                    col2 += std::norm(cand_[(rowStart + r) * n_ + cidx]);
                fro2 += col2;
                maxCol2 = std::max(maxCol2, col2);
            }
            if (maxCol2 >= thr2) return false;  // sigma_max >= column norm
            if (fro2 <= candMax * candMax) continue;  // cannot raise the max
            const double sigma = blockSigmaMax(cand_.data(), rowStart, colEnd);
            if (sigma >= threshold) return false;
            candMax = std::max(candMax, sigma);
        }
        value = candMax;
        return candMax < threshold;
    }

    void accept(std::size_t i, std::size_t j, double c, Complex ws) {
        // Basis changes by right multiplication only.
        for (std::size_t r = 0; r < n_; ++r) {
            const Complex bi = basis_(r, i), bj = basis_(r, j);
            basis_(r, i) = c * bi + ws * bj;
            basis_(r, j) = -std::conj(ws) * bi + c * bj;
        }
        applyRotation(rot_.data(), i, j, c, ws);
        recomputeCorners();
    }

private:
    void applyRotation(Complex* m, std::size_t i, std::size_t j, double c, Complex ws) const {
        // Columns i, j.
        for (std::size_t r = 0; r < n_; ++r) {
            Complex* row = m + r * n_;
            const Complex mi = row[i], mj = row[j];
            row[i] = c * mi + ws * mj;
            row[j] = -std::conj(ws) * mi + c * mj;
        }
        // Rows i, j (conjugate transform).
        Complex* ri = m + i * n_;
        Complex* rj = m + j * n_;
        const Complex wc = std::conj(ws);
        for (std::size_t col = 0; col < n_; ++col) {
            const Complex vi = ri[col], vj = rj[col];
            ri[col] = c * vi + wc * vj;
            rj[col] = -ws * vi + c * vj;
        }
    }

    /// Largest singular value of the block; copies into the scratch buffer
    /// in the taller orientation and runs values-only one-sided Jacobi.
    double blockSigmaMax(const Complex* m, std::size_t rowStart, std::size_t colEnd) {
        const std::size_t p = n_ - rowStart;
        const std::size_t q = colEnd;
        if (p == 0 || q == 0) return 0.0;
        std::size_t rows = p, cols = q;
        Complex* g = blockBuf_.data();
        if (q <= p) {
            for (std::size_t cidx = 0; cidx < q; ++cidx)
                for (std::size_t r = 0; r < p; ++r) g[cidx * p + r] = m[(rowStart + r) * n_ + cidx];
        } else {
            rows = q;
            cols = p;
            for (std::size_t r = 0; r < p; ++r)
                for (std::size_t cidx = 0; cidx < q; ++cidx)
                    g[r * q + cidx] = std::conj(m[(rowStart + r) * n_ + cidx]);
        }
        if (cols == 1) {
            double s = 0.0;
            for (std::size_t r = 0; r < rows; ++r) s += std::norm(g[r]);
            return std::sqrt(s);
        }
        for (int sweep = 0; sweep < 40; ++sweep) {
            bool rotated = false;
            for (std::size_t x = 0; x + 1 < cols; ++x) {
                for (std::size_t y = x + 1; y < cols; ++y) {
                    Complex* gx = g + x * rows;
                    Complex* gy = g + y * rows;
                    double aa = 0.0, bb = 0.0;
                    Complex cc = 0.0;
                    for (std::size_t r = 0; r < rows; ++r) {
                        aa += std::norm(gx[r]);
                        bb += std::norm(gy[r]);
                        cc += std::conj(gx[r]) * gy[r];
                    }
                    const double ac = std::abs(cc);
                    if (ac <= 1e-14 * std::sqrt(aa * bb) || ac == 0.0) continue;
                    rotated = true;
                    const Complex ph = cc / ac;
                    const double tau = (bb - aa) / (2.0 * ac);
                    const double t =
                        (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(tau, 1.0));
                    const double cs = 1.0 / std::hypot(t, 1.0);
                    const double sn = cs * t;
                    const Complex phc = std::conj(ph);
                    for (std::size_t r = 0; r < rows; ++r) {
                        const Complex vx = gx[r], vy = gy[r];
                        gx[r] = cs * vx - sn * (phc * vy);
                        gy[r] = sn * (ph * vx) + cs * vy;
                    }
                }
            }
            if (!rotated) break;
        }
        double best = 0.0;
        for (std::size_t cidx = 0; cidx < cols; ++cidx) {
            double s = 0.0;
            for (std::size_t r = 0; r < rows; ++r) s += std::norm(g[cidx * rows + r]);
            best = std::max(best, s);
        }
        return std::sqrt(best);
    }

    void recomputeCorners() {
        const Complex* src = rot_.data();
        objective_ = 0.0;
        for (std::size_t k = 0; k < corners_.size(); ++k) {
            const std::size_t rowStart = ranks_[k];
            const std::size_t colEnd = ranks_[k + 1];
            corners_[k] =
                (rowStart >= n_ || colEnd == 0) ? 0.0 : blockSigmaMax(src, rowStart, colEnd);
            objective_ = std::max(objective_, corners_[k]);
        }
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::stable_sort(order_.begin(), order_.end(),
                         [&](std::size_t x, std::size_t y) { return corners_[x] > corners_[y]; });
    }

    const CMatrix* a_;
    std::size_t n_;
    std::vector<std::size_t> ranks_;
    std::vector<std::size_t> blockOf_;
    CMatrix basis_;
    CMatrix rot_;
    std::vector<double> corners_;
    std::vector<std::size_t> order_;
    double objective_ = 0.0;
    std::vector<Complex> cand_;
    std::vector<Complex> blockBuf_;
};

struct RefineOutcome {
    CMatrix basis;
    double objective = 0.0;
};

/// Coordinate descent: for every ordered column pair, scan the candidate
/// 2x2 unitaries on the (angle, phase) grid and accept the best strictly
/// improving rotation; the angle range shrinks each sweep.
inline RefineOutcome refineBasis(FlagSearch& search, const SearchConfig& config) {
    const std::size_t n = search.basis().dim();
    RefineOutcome best{search.basis(), search.objective()};
    if (n < 2) return best;

    std::vector<Complex> phases(config.angleGrid);
    for (std::size_t u = 0; u < config.angleGrid; ++u) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(u) /
                           static_cast<double>(config.angleGrid);
        phases[u] = Complex(std::cos(phi), std::sin(phi));
    }

    double thetaMax = 0.5 * std::numbers::pi;
    for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j || search.sameBlock(i, j)) continue;
                // Best strictly improving candidate on this pair's grid.
                double bestVal = search.objective();
                double bestC = 1.0;
                Complex bestWs = 0.0;
                bool found = false;
                for (std::size_t t = 1; t <= config.angleGrid; ++t) {
                    const double theta =
                        thetaMax * static_cast<double>(t) / static_cast<double>(config.angleGrid);
                    const double c = std::cos(theta);
                    const double s = std::sin(theta);
                    for (std::size_t u = 0; u < config.angleGrid; ++u) {
                        const Complex ws = s * phases[u];
                        double val;
                        if (search.candidateBelow(i, j, c, ws, bestVal, val)) {
                            bestVal = val;
                            bestC = c;
                            bestWs = ws;
                            found = true;
                        }
                    }
                }
                if (found) search.accept(i, j, bestC, bestWs);
            }
        }
        search.resync();  // drop incremental-update drift
        if (search.objective() < best.objective) {
            best.objective = search.objective();
            best.basis = search.basis();
        }
        thetaMax *= config.shrink;
    }
    return best;
}

inline std::vector<std::size_t> completeRanks(std::size_t n) {
    std::vector<std::size_t> r(n + 1);
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

/// Unitary close to the identity: QR of I + eps * Ginibre. Used to kick the
/// incumbent out of premature corner ties.
inline CMatrix smallUnitaryKick(std::size_t n, double eps, Rng& stream) {
    const CMatrix g = stream.ginibre(n, n);
    CMatrix m = CMatrix::identity(n) + g * Complex(eps, 0.0);
    return householderQr(m).q;
}

}  // namespace detail

/// Monotone local refinement of a flag: the returned flag's objective never
/// exceeds the start's.
inline Flag refineFlag(const CMatrix& a, const Flag& start, const SearchConfig& config) {
    detail::requireSameDim(a, start.basis, "refineFlag");
    config.validate();
    detail::FlagSearch search(a, detail::completeRanks(a.dim()));
    search.setBasis(start.basis);
    return {detail::refineBasis(search, config).basis};
}

/// Same refinement over a fixed rank vector.
inline PartialFlag refinePartialFlag(const CMatrix& a, const PartialFlag& start,
                                     const SearchConfig& config) {
    detail::requireSameDim(a, start.basis, "refinePartialFlag");
    validateRanks(start);
    config.validate();
    detail::FlagSearch search(a, start.ranks);
    search.setBasis(start.basis);
    return {detail::refineBasis(search, config).basis, start.ranks};
}

namespace detail {

struct PoolEntry {
    CMatrix basis;
    std::vector<std::size_t> ranks;
};

struct PoolResult {
    double objective = 0.0;
    CMatrix basis;
    std::vector<std::size_t> ranks;
};

/// Refine every pool entry (in parallel) and return the best result;
/// ties keep the lowest pool index, so the reduction is deterministic
/// regardless of scheduling.
inline PoolResult searchPool(const CMatrix& a, const std::vector<PoolEntry>& pool,
                             const SearchConfig& config, std::size_t threads) {
    std::vector<PoolResult> results(pool.size());
    parallelFor(pool.size(), threads, [&](std::size_t idx) {
        FlagSearch search(a, pool[idx].ranks);
        search.setBasis(pool[idx].basis);
        RefineOutcome out = refineBasis(search, config);
        results[idx] = {out.objective, std::move(out.basis), pool[idx].ranks};
    });
    std::size_t best = 0;
    for (std::size_t idx = 1; idx < results.size(); ++idx)
        if (results[idx].objective < results[best].objective) best = idx;
    return std::move(results[best]);
}

}  // namespace detail

/// Certified upper bound on the distance from A to the nilpotents: refine
/// the Schur flag, the identity flag, and Haar restarts, then certify the
/// winner with an explicit nearest flag-compatible nilpotent. The value is
/// a true upper bound regardless of search quality.
inline CertifiedUpperBound estimateNu(const CMatrix& a, const SearchConfig& config = {},
                                      std::size_t threads = 0) {
    detail::requireFinite(a, "estimateNu");
    config.validate();
    const std::size_t n = a.dim();
    if (threads == 0) threads = threadCap();

    const auto ranks = detail::completeRanks(n);
    std::vector<detail::PoolEntry> pool;
    pool.reserve(config.restarts + 2);
    pool.push_back({schurForm(a).u, ranks});  // guarantees value <= rho(A)
    pool.push_back({CMatrix::identity(n), ranks});
    for (std::size_t r = 0; r < config.restarts; ++r) {
        Rng stream = Rng::deriveStream(config.seed, r);
        pool.push_back({haarUnitaryFromRng(stream, n), ranks});
    }
    detail::PoolResult best = detail::searchPool(a, pool, config, threads);

    // Second round: descent from kicked copies of the incumbent. The max of
    // corner norms is flat along ties, where single-pair moves stall; small
    // random kicks followed by the same descent escape those points.
    if (n >= 2) {
        constexpr double kKickStrengths[] = {0.25, 0.08, 0.02, 0.005};
        std::vector<detail::PoolEntry> hops;
        hops.reserve(config.restarts);
        for (std::size_t r = 0; r < config.restarts; ++r) {
            Rng stream = Rng::deriveStream(config.seed ^ 0x9e3779b97f4a7c15ULL, r);
            const double eps = kKickStrengths[r % 4];
            hops.push_back({best.basis * detail::smallUnitaryKick(n, eps, stream), ranks});
        }
        detail::PoolResult hopped = detail::searchPool(a, hops, config, threads);
        if (hopped.objective < best.objective) best = std::move(hopped);
    }
    return nearestFlagNilpotent(a, Flag{std::move(best.basis)}, config.certTol);
}

namespace detail {

inline void enumerateRankVectors(std::size_t d, std::size_t len, std::vector<std::size_t>& cur,
                                 std::vector<std::vector<std::size_t>>& out) {
    if (cur.size() == len) {
        std::vector<std::size_t> full;
        full.push_back(0);
        full.insert(full.end(), cur.begin(), cur.end());
        full.push_back(d);
        out.push_back(std::move(full));
        return;
    }
    const std::size_t lo = cur.empty() ? 0 : cur.back();
    for (std::size_t r = lo; r <= d; ++r) {
        cur.push_back(r);
        enumerateRankVectors(d, len, cur, out);
        cur.pop_back();
    }
}

/// All nondecreasing interior rank vectors for a chain of length `order` in
/// dimension d.
inline std::vector<std::vector<std::size_t>> allRankVectors(std::size_t d, std::size_t order) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    enumerateRankVectors(d, order - 1, cur, out);
    return out;
}

/// Insert one duplicated rank into a shorter vector in every position;
/// padding can only shrink the objective, which keeps the order ladder
/// monotone.
inline std::vector<std::vector<std::size_t>> paddedRankVectors(
    const std::vector<std::size_t>& ranks) {
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t pos = 0; pos + 1 < ranks.size(); ++pos) {
        std::vector<std::size_t> padded = ranks;
        padded.insert(padded.begin() + static_cast<std::ptrdiff_t>(pos + 1), ranks[pos]);
        out.push_back(std::move(padded));
    }
    return out;
}

}  // namespace detail

/// Certified upper bound on the distance to { N : N^order = 0 } in ambient
/// dimension d >= order: joint search over the basis and the rank vector.
/// order = d delegates to estimateNu (complete chains already reach every
/// nilpotent).
inline CertifiedUpperBound estimateNuOrder(const CMatrix& a, std::size_t order,
                                           const SearchConfig& config = {},
                                           std::size_t threads = 0) {
    detail::requireFinite(a, "estimateNuOrder");
    config.validate();
    const std::size_t d = a.dim();
    if (order == 0 || order > d) throw InputError("estimateNuOrder: need 1 <= order <= dim");
    if (order == d) return estimateNu(a, config, threads);
    if (threads == 0) threads = threadCap();

    SearchConfig vecConfig = config;
    vecConfig.restarts = std::max<std::size_t>(2, config.restarts / 8);

    // Order ladder: seed each level with padded versions of the previous
    // winner so the estimate is nonincreasing in the order by construction.
    detail::PoolResult prev;
    prev.ranks = {0, d};
    prev.basis = CMatrix::identity(d);
    prev.objective = operatorNorm(a);
    if (order == 1) {
        // Only the zero matrix is 1-nilpotent; certify directly.
        CertifiedUpperBound out;
        out.value = prev.objective;
        out.flag = PartialFlag{prev.basis, prev.ranks};
        out.certificate = CMatrix(d, d);
        out.residual = 0.0;
        out.nilpotencyDefect = 0.0;
        return out;
    }

    const CMatrix schurBasis = schurForm(a).u;
    for (std::size_t level = 2; level <= order; ++level) {
        std::vector<detail::PoolEntry> pool;
        for (const auto& ranks : detail::allRankVectors(d, level)) {
            pool.push_back({schurBasis, ranks});
            pool.push_back({CMatrix::identity(d), ranks});
            for (std::size_t r = 0; r < vecConfig.restarts; ++r) {
                Rng stream = Rng::deriveStream(config.seed, level * 1000003 + r);
                pool.push_back({haarUnitaryFromRng(stream, d), ranks});
            }
        }
        for (auto& padded : detail::paddedRankVectors(prev.ranks))
            pool.push_back({prev.basis, std::move(padded)});
        detail::PoolResult cur = detail::searchPool(a, pool, vecConfig, threads);
        if (cur.objective <= prev.objective) prev = std::move(cur);
    }

    CertifiedUpperBound out =
        nearestPartialFlagNilpotent(a, PartialFlag{prev.basis, prev.ranks}, config.certTol);
    // The certificate is order-nilpotent by construction; record the defect
    // of the n-th power as a direct check.
    CMatrix pw = out.certificate;
    for (std::size_t k = 1; k < order; ++k) pw = pw * out.certificate;
    if (operatorNorm(pw) > config.certTol)
        throw NumericalError("estimateNuOrder: certificate power exceeds tolerance");
    return out;
}

}  // namespace nildist
