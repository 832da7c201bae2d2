#ifndef NUCBOUND_ORACLE_HPP
#define NUCBOUND_ORACLE_HPP

// Desk-scale estimators of the tensor spectral and nuclear norms, independent
// of the flattening bounds. Only meant for tensors with a few hundred entries.

#include <nucbound/linalg.hpp>
#include <nucbound/parallel.hpp>
#include <nucbound/tensor.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace nucbound {

struct RankOneTerm {
    double                           weight = 0.0; /// lambda_s >= 0
    std::vector<std::vector<double>> factors;      /// unit vectors, one per mode
};

struct OracleEstimate {
    double                   primal_upper = 0.0; /// sum of |lambda_s| of the best decomposition found
    double                   dual_lower   = 0.0; /// certified: ||A||_HS^2 / (flattening spectral bound)
    std::vector<RankOneTerm> decomposition;
    std::size_t              restarts_used = 0;
    std::uint64_t            seed          = 0;
    std::size_t              max_terms     = 0;
    double                   residual      = 0.0; /// ||A - sum of terms||_HS
    bool                     converged     = false;
};

struct PrimalOptions {
    std::size_t   max_terms    = 0; /// 0 selects the product of the two smallest dimensions
    std::size_t   restarts     = 20;
    std::uint64_t seed         = 0;
    double        residual_tol = 1e-6; /// relative to ||A||_HS
    unsigned      threads      = 1;
    int           max_stages   = 9;    /// penalty weight grows x10 per stage
    int           max_sweeps   = 4000; /// block-coordinate sweeps per stage
};

namespace detail {

/// Multi-index of every linear position of a shape.
class IndexTable {
public:
    explicit IndexTable(const Shape& shape) : order_(shape.size()), index_(product(shape) * shape.size()) {
        std::vector<std::size_t> idx(order_, 0);
        for (std::size_t lin = 0; lin * order_ < index_.size(); ++lin) {
            std::copy(idx.begin(), idx.end(), index_.begin() + static_cast<std::ptrdiff_t>(lin * order_));
            for (std::size_t k = order_; k-- > 0;) {
                if (++idx[k] < shape[k]) {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    [[nodiscard]] std::size_t order() const noexcept { return order_; }
    [[nodiscard]] std::size_t size() const noexcept { return order_ ? index_.size() / order_ : 0; }
    [[nodiscard]] std::span<const std::size_t> operator[](std::size_t lin) const { return std::span(index_).subspan(lin * order_, order_); }

private:
    std::size_t              order_;
    std::vector<std::size_t> index_;
};

using Factors = std::vector<std::vector<double>>;

inline double weight_except(const Factors& f, std::span<const std::size_t> idx, std::size_t skip) {
    double w = 1.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        if (j != skip) {
            w *= f[j][idx[j]];
        }
    }
    return w;
}

/// g[i] = sum over entries with index i in `mode` of values * prod_{j != mode} f_j.
inline std::vector<double> contract_except(std::span<const double> values, const IndexTable& table, const Factors& f, std::size_t mode) {
    std::vector<double> g(f[mode].size(), 0.0);
    for (std::size_t lin = 0; lin < values.size(); ++lin) {
        const auto idx = table[lin];
        g[idx[mode]] += values[lin] * weight_except(f, idx, mode);
    }
    return g;
}

inline std::vector<double> gaussian_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double>              v(n);
    for (double& x : v) {
        x = normal(rng);
    }
    return v;
}

inline void scale_to(std::vector<double>& v, double target) {
    const double n = norm2(v);
    for (double& x : v) {
        x = n > 0.0 ? x * (target / n) : 0.0;
    }
}

/// Alternating best-rank-one ascent from one random start.
inline double hopm_run(const DenseTensor& a, const IndexTable& table, std::mt19937_64& rng, int maxIters) {
    Factors f;
    for (std::size_t dim : a.shape()) {
        f.push_back(gaussian_vector(dim, rng));
        scale_to(f.back(), 1.0);
    }
    double value = 0.0;
    for (int it = 0; it < maxIters; ++it) {
        const double previous = value;
        for (std::size_t k = 0; k < f.size(); ++k) {
            auto         g  = contract_except(a.data(), table, f, k);
            const double ng = norm2(g);
            if (ng == 0.0) {
                return std::max(value, 0.0);
            }
            scale_to(g, 1.0);
            f[k]  = std::move(g);
            value = ng;
        }
        if (value - previous <= 1e-15 * value) {
            break;
        }
    }
    return value;
}

struct PenaltyRun {
    double  value    = 0.0;
    double  residual = std::numeric_limits<double>::infinity();
    bool    feasible = false;
    std::vector<Factors> terms;
};

/// Minimises mu * ||A - sum_s ⊗_k f_{s,k}||^2 + sum_s prod_k ||f_{s,k}|| by exact
/// minimisation over one factor vector at a time (a group soft-threshold),
/// raising mu ten-fold per stage until the residual meets the tolerance.
class PenalizedDecomposition {
    static constexpr double kStallRatio    = 0.5;
    static constexpr double kStationaryRel = 1e-9; // per-sweep relative decrease that ends a stage

public:
    PenalizedDecomposition(const DenseTensor& a, const IndexTable& table, std::size_t terms, std::mt19937_64& rng)
        : a_(a), table_(table), rng_(rng), residual_(a.data().begin(), a.data().end()), terms_(terms) {
        revive(hs_norm(a));
    }

    PenaltyRun run(const PrimalOptions& opts) {
        const double hs           = hs_norm(a_);
        double       lastResidual = std::numeric_limits<double>::infinity();
        for (int stage = 0; stage < opts.max_stages; ++stage) {
            const double mu = std::pow(10.0, stage) / hs;
            if (stage > 0) {
                revive(residual_norm());
            }
            double previous = objective(mu);
            for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
                this->sweep(mu);
                const double current = objective(mu);
                if (previous - current <= kStationaryRel * current) {
                    break;
                }
                previous = current;
            }
            const double res = residual_norm();
            if (res <= opts.residual_tol * hs) {
                break;
            }
            // A feasible path shrinks the residual roughly ten-fold per stage.
            if (stage >= 2 && res > kStallRatio * lastResidual) {
                break;
            }
            lastResidual = res;
        }
        PenaltyRun out;
        out.residual = residual_norm();
        out.feasible = out.residual <= opts.residual_tol * hs;
        out.value    = penalty_sum();
        out.terms    = terms_;
        return out;
    }

private:
    // Terms thresholded to zero stay zero under the updates; restart them at
    // random with a share of the given magnitude.
    void revive(double magnitude) {
        const double scale = std::pow(magnitude / static_cast<double>(terms_.size()), 1.0 / static_cast<double>(a_.order()));
        for (auto& f : terms_) {
            if (!f.empty() && norm2(f.front()) > 0.0) {
                continue;
            }
            f.clear();
            for (std::size_t dim : a_.shape()) {
                f.push_back(gaussian_vector(dim, rng_));
                scale_to(f.back(), scale);
            }
            subtract_term(f);
        }
    }

    void subtract_term(const Factors& f) {
        for (std::size_t lin = 0; lin < residual_.size(); ++lin) {
            residual_[lin] -= weight_except(f, table_[lin], f.size());
        }
    }

    void sweep(double mu) {
        const std::size_t order = a_.order();
        for (auto& f : terms_) {
            for (std::size_t k = 0; k < order; ++k) {
                double others2 = 1.0;
                for (std::size_t j = 0; j < order; ++j) {
                    if (j != k) {
                        others2 *= dot(f[j], f[j]);
                    }
                }
                if (others2 == 0.0) {
                    continue;
                }
                auto g = contract_except(residual_, table_, f, k);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    g[i] = f[k][i] + g[i] / others2;
                }
                const double ng     = norm2(g);
                const double shrink = ng > 0.0 ? std::max(0.0, 1.0 - 1.0 / (2.0 * mu * std::sqrt(others2) * ng)) : 0.0;
                std::vector<double> delta(g.size());
                for (std::size_t i = 0; i < g.size(); ++i) {
                    g[i] *= shrink;
                    delta[i] = g[i] - f[k][i];
                }
                for (std::size_t lin = 0; lin < residual_.size(); ++lin) {
                    const auto idx = table_[lin];
                    residual_[lin] -= delta[idx[k]] * weight_except(f, idx, k);
                }
                f[k] = std::move(g);
            }
            balance(f);
        }
    }

    // Equalise factor norms; the term and its product of norms are unchanged.
    static void balance(Factors& f) {
        double prod = 1.0;
        for (const auto& v : f) {
            prod *= norm2(v);
        }
        const double target = prod > 0.0 ? std::pow(prod, 1.0 / static_cast<double>(f.size())) : 0.0;
        for (auto& v : f) {
            scale_to(v, target);
        }
    }

    [[nodiscard]] double residual_norm() const { return norm2(residual_); }

    [[nodiscard]] double penalty_sum() const {
        double total = 0.0;
        for (const auto& f : terms_) {
            double prod = 1.0;
            for (const auto& v : f) {
                prod *= norm2(v);
            }
            total += prod;
        }
        return total;
    }

    [[nodiscard]] double objective(double mu) const { return mu * dot(residual_, residual_) + penalty_sum(); }

    const DenseTensor&   a_;
    const IndexTable&    table_;
    std::mt19937_64&     rng_;
    std::vector<double>  residual_;
    std::vector<Factors> terms_;
};

/// Least-squares refit of the weights with the factor directions held fixed,
/// which undoes the shrinkage left by the penalty. Rejected if it lands above
/// sum |lambda_s| + c ||R||_HS of the unrefitted run, an upper bound on ||A||_*
/// since c ||R||_HS >= ||R||_* (this only happens for near-collinear terms).
inline void refit_weights(const DenseTensor& a, double residualTol, PenaltyRun& run) {
    std::vector<Factors> dirs;
    for (const auto& f : run.terms) {
        if (!f.empty() && norm2(f.front()) > 0.0) {
            Factors unit = f;
            for (auto& v : unit) {
                scale_to(v, 1.0);
            }
            dirs.push_back(std::move(unit));
        }
    }
    if (dirs.empty()) {
        return;
    }
    const std::size_t   n = a.size();
    const std::size_t   t = dirs.size();
    std::vector<double> design(n * t);
    for (std::size_t s = 0; s < t; ++s) {
        const auto term = rank_one(dirs[s]);
        for (std::size_t i = 0; i < n; ++i) {
            design[i * t + s] = term.data()[i];
        }
    }
    const auto f = svd(Matrix(n, t, design));
    std::vector<double> lambda(t, 0.0);
    for (std::size_t r = 0; r < f.rank(); ++r) {
        const double c = dot(f.left[r], a.data()) / f.sigma[r];
        for (std::size_t s = 0; s < t; ++s) {
            lambda[s] += c * f.right[r][s];
        }
    }
    std::vector<double> residual(a.data().begin(), a.data().end());
    double              value = 0.0;
    for (std::size_t s = 0; s < t; ++s) {
        value += std::abs(lambda[s]);
        for (std::size_t i = 0; i < n; ++i) {
            residual[i] -= lambda[s] * design[i * t + s];
        }
    }
    const Shape& shape   = a.shape();
    const double c       = std::sqrt(static_cast<double>(n) / static_cast<double>(*std::max_element(shape.begin(), shape.end())));
    const double refitRes = norm2(residual);
    const double bound = run.value + c * run.residual;
    if (refitRes > run.residual || value > bound + 1e-12 * bound) {
        return;
    }
    run.terms.clear();
    for (std::size_t s = 0; s < t; ++s) {
        if (lambda[s] == 0.0) {
            continue;
        }
        const double scale = std::pow(std::abs(lambda[s]), 1.0 / static_cast<double>(shape.size()));
        for (auto& v : dirs[s]) {
            scale_to(v, scale);
        }
        if (lambda[s] < 0.0) {
            for (double& x : dirs[s].front()) {
                x = -x;
            }
        }
        run.terms.push_back(std::move(dirs[s]));
    }
    run.value    = value;
    run.residual = refitRes;
    run.feasible = refitRes <= residualTol * hs_norm(a);
}

inline std::size_t default_max_terms(const Shape& shape) {
    Shape sorted = shape;
    std::sort(sorted.begin(), sorted.end());
    return sorted.size() == 1 ? 1 : sorted[0] * sorted[1];
}

} // namespace detail

/// Best value of <A, x1 ⊗ ... ⊗ xN> over unit vectors found by multistart
/// alternating maximisation; every value returned is attained, hence a lower
/// bound on the spectral norm. Restart k is seeded with seed + k.
[[nodiscard]] inline double spectral_lower_estimate(const DenseTensor& a, std::size_t restarts, std::uint64_t seed, int max_iters = 1000) {
    if (restarts < 1) {
        throw Error(ErrorKind::InvalidArgument, "spectral_lower_estimate needs at least one restart");
    }
    if (a.is_zero()) {
        return 0.0;
    }
    const detail::IndexTable table(a.shape());
    double                   best = 0.0;
    for (std::size_t k = 0; k < restarts; ++k) {
        std::mt19937_64 rng(seed + k);
        best = std::max(best, detail::hopm_run(a, table, rng, max_iters));
    }
    return best;
}

/// min over modes of the flattening spectral norms; bounds the tensor spectral
/// norm from above since unit rank-one tensors flatten to unit rank-one matrices.
[[nodiscard]] inline double spectral_upper_bound(const DenseTensor& a) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m <= a.order(); ++m) {
        best = std::min(best, matrix_spectral_norm(flatten(a, m)));
    }
    return best;
}

/// <A, A/u> with u = spectral_upper_bound(A): a certified lower bound on ||A||_*.
[[nodiscard]] inline double dual_lower_estimate(const DenseTensor& a) {
    if (a.is_zero()) {
        throw Error(ErrorKind::ZeroTensor, "dual lower estimate is undefined for the zero tensor");
    }
    const double hs = hs_norm(a);
    return hs * hs / spectral_upper_bound(a);
}

/// Multistart search for a short decomposition A ≈ sum_s lambda_s x_s ⊗ y_s ⊗ ...
/// minimising sum |lambda_s|. Restart k runs once for every term count
/// t = 1..max_terms (seeded from seed + k and t), so allowing more terms never
/// makes the estimate worse. `converged` is false when no run met the residual
/// tolerance; the smallest-residual run is then reported.
[[nodiscard]] inline OracleEstimate primal_estimate(const DenseTensor& a, const PrimalOptions& opts = {}) {
    if (opts.restarts < 1) {
        throw Error(ErrorKind::InvalidArgument, "primal_estimate needs at least one restart");
    }
    if (!(opts.residual_tol > 0.0)) {
        throw Error(ErrorKind::InvalidTolerance, "residual tolerance must be > 0");
    }
    OracleEstimate out;
    out.seed          = opts.seed;
    out.restarts_used = opts.restarts;
    out.max_terms     = opts.max_terms ? opts.max_terms : detail::default_max_terms(a.shape());
    if (a.is_zero()) {
        out.converged = true;
        return out;
    }
    out.dual_lower = dual_lower_estimate(a);

    const detail::IndexTable        table(a.shape());
    const std::size_t               terms = out.max_terms;
    std::vector<detail::PenaltyRun> runs(opts.restarts * terms);
    detail::parallel_for(runs.size(), opts.threads, [&](std::size_t job) {
        const std::size_t k = job / terms;
        const std::size_t t = job % terms + 1;
        const std::uint64_t restartSeed = opts.seed + k;
        std::seed_seq       seq{static_cast<std::uint32_t>(restartSeed), static_cast<std::uint32_t>(restartSeed >> 32), static_cast<std::uint32_t>(t)};
        std::mt19937_64   rng(seq);
        detail::PenalizedDecomposition problem(a, table, t, rng);
        runs[job] = problem.run(opts);
        detail::refit_weights(a, opts.residual_tol, runs[job]);
    });

    const auto better = [](const detail::PenaltyRun& x, const detail::PenaltyRun& y) {
        if (x.feasible != y.feasible) {
            return x.feasible;
        }
        return x.feasible ? x.value < y.value : x.residual < y.residual;
    };
    const auto& best = *std::min_element(runs.begin(), runs.end(), better);

    out.primal_upper = best.value;
    out.residual     = best.residual;
    out.converged    = best.feasible;
    for (const auto& f : best.terms) {
        RankOneTerm term;
        term.weight = 1.0;
        for (const auto& v : f) {
            term.weight *= detail::norm2(v);
        }
        if (term.weight == 0.0) {
            continue;
        }
        for (auto v : f) {
            detail::scale_to(v, 1.0);
            term.factors.push_back(std::move(v));
        }
        out.decomposition.push_back(std::move(term));
    }
    return out;
}

} // namespace nucbound

#endif // NUCBOUND_ORACLE_HPP
