#ifndef NUCBOUND_LINALG_HPP
#define NUCBOUND_LINALG_HPP

#include <nucbound/tensor.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace nucbound {

inline constexpr double kDefaultTruncTol = 1e-12;

/// Thin SVD: M = sum_i sigma[i] * left[i] ⊗ right[i].
struct SVDResult {
    std::vector<double>              sigma; /// descending, >= 0
    std::vector<std::vector<double>> left;  /// orthonormal, length rows
    std::vector<std::vector<double>> right; /// orthonormal, length cols

    [[nodiscard]] std::size_t rank() const noexcept { return sigma.size(); }
};

namespace detail {

// Columns of a tall (m >= n) matrix stored column by column.
using Columns = std::vector<std::vector<double>>;

inline void rotate(std::vector<double>& a, std::vector<double>& b, double c, double s) {
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double x = a[k];
        const double y = b[k];
        a[k]           = c * x - s * y;
        b[k]           = s * x + c * y;
    }
}

/// One-sided (Hestenes) Jacobi. On return the columns of `w` are mutually
/// orthogonal and `v` holds the accumulated rotations.
inline void hestenes_jacobi(Columns& w, Columns& v) {
    const std::size_t n = w.size();
    v.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        v[i][i] = 1.0;
    }
    constexpr double    eps       = std::numeric_limits<double>::epsilon();
    constexpr int       maxSweeps = 80;
    for (int sweep = 0; sweep < maxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double alpha = dot(w[i], w[i]);
                const double beta  = dot(w[j], w[j]);
                const double gamma = dot(w[i], w[j]);
                if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) {
                    continue;
                }
                rotated           = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t    = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c    = 1.0 / std::sqrt(1.0 + t * t);
                const double s    = c * t;
                rotate(w[i], w[j], c, s);
                rotate(v[i], v[j], c, s);
            }
        }
        if (!rotated) {
            break;
        }
    }
}

/// Make `u` orthonormal to `basis` (two Gram-Schmidt passes); if it collapses,
/// substitute the standard basis vector with the largest remaining component.
inline void project_out(std::vector<double>& u, const Columns& basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
            const double p = dot(u, b);
            for (std::size_t k = 0; k < u.size(); ++k) {
                u[k] -= p * b[k];
            }
        }
    }
}

inline void orthonormalize_against(std::vector<double>& u, const Columns& basis) {
    project_out(u, basis);
    if (norm2(u) <= 0.5) {
        double bestNorm = -1.0;
        for (std::size_t e = 0; e < u.size(); ++e) {
            std::vector<double> cand(u.size(), 0.0);
            cand[e] = 1.0;
            project_out(cand, basis);
            if (const double nc = norm2(cand); nc > bestNorm) {
                bestNorm = nc;
                u        = std::move(cand);
            }
        }
    }
    const double nu = norm2(u);
    for (double& x : u) {
        x /= nu;
    }
}

inline void apply_sign_convention(std::vector<double>& u, std::vector<double>& v) {
    constexpr double zeroTol = 64.0 * std::numeric_limits<double>::epsilon();
    for (double x : u) {
        if (std::abs(x) > zeroTol) {
            if (x < 0.0) {
                for (double& y : u) {
                    y = -y;
                }
                for (double& y : v) {
                    y = -y;
                }
            }
            return;
        }
    }
}

} // namespace detail

/// Thin SVD with relative truncation: singular values below trunc_tol * sigma_1
/// are dropped. The zero matrix has an empty factorization. Each left vector's
/// first nonzero entry is made nonnegative.
[[nodiscard]] inline SVDResult svd(const Matrix& m, double trunc_tol = kDefaultTruncTol) {
    if (!(trunc_tol >= 0.0) || !std::isfinite(trunc_tol)) {
        throw Error(ErrorKind::InvalidTolerance, "truncation tolerance must be finite and >= 0");
    }
    detail::require_finite(m.data(), "svd input");

    const bool        wide = m.rows() < m.cols();
    const std::size_t tall = wide ? m.cols() : m.rows();
    const std::size_t n    = wide ? m.rows() : m.cols();

    detail::Columns w(n, std::vector<double>(tall));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (wide) {
                w[r][c] = m(r, c);
            } else {
                w[c][r] = m(r, c);
            }
        }
    }
    detail::Columns v;
    detail::hestenes_jacobi(w, v);

    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) {
        norms[j] = detail::norm2(w[j]);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

    SVDResult out;
    if (n == 0 || norms[order[0]] == 0.0) {
        return out;
    }
    const double sigma1    = norms[order[0]];
    const double cutoff    = trunc_tol * sigma1;
    const double unsafeRel = std::sqrt(std::numeric_limits<double>::epsilon());

    detail::Columns tallVecs;
    detail::Columns shortVecs;
    for (std::size_t j : order) {
        const double s = norms[j];
        if (s < cutoff) {
            break;
        }
        std::vector<double> u = w[j];
        if (s > 0.0) {
            for (double& x : u) {
                x /= s;
            }
        }
        if (s <= unsafeRel * sigma1) {
            detail::orthonormalize_against(u, tallVecs);
        }
        out.sigma.push_back(s);
        tallVecs.push_back(std::move(u));
        shortVecs.push_back(v[j]);
    }
    if (wide) {
        out.left  = std::move(shortVecs);
        out.right = std::move(tallVecs);
    } else {
        out.left  = std::move(tallVecs);
        out.right = std::move(shortVecs);
    }
    for (std::size_t i = 0; i < out.sigma.size(); ++i) {
        detail::apply_sign_convention(out.left[i], out.right[i]);
    }
    return out;
}

/// Sum of all singular values.
[[nodiscard]] inline double matrix_nuclear_norm(const Matrix& m) {
    const auto f = svd(m, 0.0);
    return std::accumulate(f.sigma.begin(), f.sigma.end(), 0.0);
}

/// Largest singular value (0 for the zero matrix).
[[nodiscard]] inline double matrix_spectral_norm(const Matrix& m) {
    const auto f = svd(m, 0.0);
    return f.sigma.empty() ? 0.0 : f.sigma.front();
}

/// Number of singular values strictly above tol * sigma_1.
[[nodiscard]] inline std::size_t numerical_rank(const Matrix& m, double tol) {
    const auto f = svd(m, 0.0);
    if (f.sigma.empty()) {
        return 0;
    }
    const double cutoff = tol * f.sigma.front();
    return static_cast<std::size_t>(std::count_if(f.sigma.begin(), f.sigma.end(), [&](double s) { return s > cutoff; }));
}

} // namespace nucbound

#endif // NUCBOUND_LINALG_HPP
