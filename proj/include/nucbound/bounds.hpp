#ifndef NUCBOUND_BOUNDS_HPP
#define NUCBOUND_BOUNDS_HPP

#include <nucbound/linalg.hpp>
#include <nucbound/parallel.hpp>
#include <nucbound/tensor.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

namespace nucbound {

inline constexpr double kDefaultCertifyTol = 1e-6;

struct BoundsOptions {
    double   trunc_tol = kDefaultTruncTol; /// relative SVD truncation for every flattening
    unsigned threads   = 1;                /// cap on concurrent per-mode analyses
};

/// Bounds derived from the SVD of one flattening A_(m) = sum_i sigma_i x_i ⊗ z_i,
/// with each z_i reshaped into a tensor Z_i over the remaining modes.
struct ModeAnalysis {
    std::size_t         mode               = 1;
    double              flattening_nuclear = 0.0; /// ||A_(m)||_*
    std::vector<double> sigma;
    std::vector<double> z_nuclear;     /// ||Z_i||_*; an upper bound when Z_i has order >= 3
    double              z_nuclear_max  = 0.0;
    double              refined_upper  = 0.0; /// sum_i sigma_i ||Z_i||_*
    double              coarse_upper   = 0.0; /// sqrt(prod of other dims / largest other dim) * ||A_(m)||_*
    bool                z_nuclear_exact = true;
};

/// Evidence that ||A||_* = ||A_(m)||_* for an order-3 tensor: every Z_i is
/// rank one, so A = sum_i weights[i] x[i] ⊗ u[i] ⊗ v[i] where u lives in the
/// first remaining mode and v in the second.
struct TightnessCertificate {
    Shape                            shape;
    std::size_t                      mode  = 1;
    double                           value = 0.0;
    std::vector<double>              weights;
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> u;
    std::vector<std::vector<double>> v;
    double                           max_z_deviation = 0.0;
};

struct BoundsReport {
    Shape                               shape;
    std::vector<ModeAnalysis>           per_mode;
    double                              lower      = 0.0;
    std::size_t                         lower_mode = 1;
    double                              upper      = 0.0;
    std::size_t                         upper_mode = 1;
    double                              hash_norm  = 0.0;
    double                              hs_upper   = 0.0;
    std::optional<TightnessCertificate> certificate;
    double                              certify_tol = kDefaultCertifyTol;
    double                              trunc_tol   = kDefaultTruncTol;
};

/// sqrt of the product of the dimensions other than `mode`, excluding the largest of them.
[[nodiscard]] inline double coarse_factor(const Shape& shape, std::size_t mode) {
    const Shape rest = remaining_shape(shape, mode);
    if (rest.empty()) {
        return 1.0;
    }
    const double prod = static_cast<double>(detail::product(rest));
    return std::sqrt(prod / static_cast<double>(*std::max_element(rest.begin(), rest.end())));
}

[[nodiscard]] inline double upper_bound(const DenseTensor& a, const BoundsOptions& opts = {});

namespace detail {

inline double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

/// Nuclear norm of a unit right singular vector viewed as a tensor over the
/// remaining modes. Exact for vectors and matrices, the refined upper bound otherwise.
inline double fiber_nuclear(std::span<const double> z, const Shape& rest, const BoundsOptions& opts) {
    if (rest.size() <= 1) {
        return norm2(z);
    }
    const DenseTensor fiber = reshape_fiber(z, rest);
    if (rest.size() == 2) {
        return matrix_nuclear_norm(as_matrix(fiber));
    }
    BoundsOptions inner = opts;
    inner.threads       = 1;
    return upper_bound(fiber, inner);
}

} // namespace detail

[[nodiscard]] inline double flattening_nuclear_norm(const DenseTensor& a, std::size_t mode, const BoundsOptions& opts = {}) {
    const auto f = svd(flatten(a, mode), opts.trunc_tol);
    return detail::sum(f.sigma);
}

[[nodiscard]] inline ModeAnalysis analyze_mode(const DenseTensor& a, std::size_t mode, const BoundsOptions& opts = {}) {
    detail::check_mode(a.order(), mode);
    const auto   f    = svd(flatten(a, mode), opts.trunc_tol);
    const Shape  rest = remaining_shape(a.shape(), mode);
    ModeAnalysis out;
    out.mode               = mode;
    out.sigma              = f.sigma;
    out.flattening_nuclear = detail::sum(f.sigma);
    out.z_nuclear_exact    = rest.size() <= 2;
    for (std::size_t i = 0; i < f.rank(); ++i) {
        const double zn = detail::fiber_nuclear(f.right[i], rest, opts);
        out.z_nuclear.push_back(zn);
        out.refined_upper += f.sigma[i] * zn;
        out.z_nuclear_max = std::max(out.z_nuclear_max, zn);
    }
    out.coarse_upper = coarse_factor(a.shape(), mode) * out.flattening_nuclear;
    return out;
}

/// max_m ||A_(m)||_*, a lower bound on ||A||_*.
[[nodiscard]] inline double lower_bound(const DenseTensor& a, const BoundsOptions& opts = {}) {
    double best = 0.0;
    for (std::size_t m = 1; m <= a.order(); ++m) {
        best = std::max(best, flattening_nuclear_norm(a, m, opts));
    }
    return best;
}

/// min_m sum_i sigma_i ||Z_i||_*, an upper bound on ||A||_*.
[[nodiscard]] inline double upper_bound(const DenseTensor& a, const BoundsOptions& opts) {
    std::vector<double> refined(a.order());
    detail::parallel_for(a.order(), opts.threads, [&](std::size_t k) { refined[k] = analyze_mode(a, k + 1, opts).refined_upper; });
    return *std::min_element(refined.begin(), refined.end());
}

[[nodiscard]] inline double coarse_upper_bound(const DenseTensor& a, std::size_t mode, const BoundsOptions& opts = {}) {
    detail::check_mode(a.order(), mode);
    return coarse_factor(a.shape(), mode) * flattening_nuclear_norm(a, mode, opts);
}

/// Mean of the flattening nuclear norms over all modes.
[[nodiscard]] inline double hash_norm(const DenseTensor& a, const BoundsOptions& opts = {}) {
    double total = 0.0;
    for (std::size_t m = 1; m <= a.order(); ++m) {
        total += flattening_nuclear_norm(a, m, opts);
    }
    return total / static_cast<double>(a.order());
}

/// sqrt(product of all dimensions but the largest) * ||A||_HS.
[[nodiscard]] inline double hs_upper_bound(const DenseTensor& a) {
    const auto&  shape = a.shape();
    const double prod  = static_cast<double>(detail::product(shape));
    return std::sqrt(prod / static_cast<double>(*std::max_element(shape.begin(), shape.end()))) * hs_norm(a);
}

namespace detail {

struct FiberSplit {
    SVDResult              flat;
    std::vector<SVDResult> fibers;
    double                 max_deviation = 0.0;
};

inline FiberSplit split_fibers(const DenseTensor& a, std::size_t mode, const BoundsOptions& opts) {
    if (a.order() != 3) {
        throw Error(ErrorKind::InvalidOrder, "tightness certificates are defined for order-3 tensors, got order " + std::to_string(a.order()));
    }
    check_mode(a.order(), mode);
    FiberSplit  out{svd(flatten(a, mode), opts.trunc_tol), {}, 0.0};
    const Shape rest = remaining_shape(a.shape(), mode);
    for (const auto& z : out.flat.right) {
        auto zf = svd(as_matrix(reshape_fiber(z, rest)), 0.0);
        out.max_deviation = std::max(out.max_deviation, std::abs(sum(zf.sigma) - 1.0));
        out.fibers.push_back(std::move(zf));
    }
    return out;
}

} // namespace detail

/// max_i | ||Z_i||_* - 1 | for an order-3 tensor (0 for the zero tensor).
[[nodiscard]] inline double max_z_deviation(const DenseTensor& a, std::size_t mode, const BoundsOptions& opts = {}) { return detail::split_fibers(a, mode, opts).max_deviation; }

[[nodiscard]] inline std::optional<TightnessCertificate> certify_tightness(const DenseTensor& a, std::size_t mode, double tol = kDefaultCertifyTol, const BoundsOptions& opts = {}) {
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw Error(ErrorKind::InvalidTolerance, "certification tolerance must be finite and > 0");
    }
    auto split = detail::split_fibers(a, mode, opts);
    if (split.flat.rank() == 0 || split.max_deviation > tol) {
        return std::nullopt;
    }
    TightnessCertificate cert;
    cert.shape           = a.shape();
    cert.mode            = mode;
    cert.weights         = split.flat.sigma;
    cert.value           = detail::sum(split.flat.sigma);
    cert.x               = split.flat.left;
    cert.max_z_deviation = split.max_deviation;
    for (auto& zf : split.fibers) {
        cert.u.push_back(std::move(zf.left.front()));
        cert.v.push_back(std::move(zf.right.front()));
    }
    return cert;
}

/// Sum of the certificate's rank-one terms, with factors placed in their modes.
[[nodiscard]] inline DenseTensor reconstruct(const TightnessCertificate& cert) {
    std::vector<double> total(detail::product(cert.shape), 0.0);
    for (std::size_t i = 0; i < cert.weights.size(); ++i) {
        std::vector<std::vector<double>> factors;
        const std::vector<double>*       rest[] = {&cert.u[i], &cert.v[i]};
        std::size_t                      next   = 0;
        for (std::size_t k = 1; k <= cert.shape.size(); ++k) {
            factors.push_back(k == cert.mode ? cert.x[i] : *rest[next++]);
        }
        const auto term = rank_one(factors);
        for (std::size_t j = 0; j < total.size(); ++j) {
            total[j] += cert.weights[i] * term.data()[j];
        }
    }
    return DenseTensor(cert.shape, std::move(total));
}

/// Every bound at once: per-mode analyses, the interval [lower, upper], the
/// mean flattening norm, the Hilbert-Schmidt bound and, for order-3 tensors,
/// the first mode whose fibers certify tightness within `tol`.
[[nodiscard]] inline BoundsReport full_report(const DenseTensor& a, double tol = kDefaultCertifyTol, const BoundsOptions& opts = {}) {
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw Error(ErrorKind::InvalidTolerance, "certification tolerance must be finite and > 0");
    }
    BoundsReport report;
    report.shape       = a.shape();
    report.certify_tol = tol;
    report.trunc_tol   = opts.trunc_tol;
    report.per_mode.resize(a.order());
    detail::parallel_for(a.order(), opts.threads, [&](std::size_t k) { report.per_mode[k] = analyze_mode(a, k + 1, opts); });

    report.lower = report.per_mode.front().flattening_nuclear;
    report.upper = report.per_mode.front().refined_upper;
    double total = 0.0;
    for (const auto& m : report.per_mode) {
        total += m.flattening_nuclear;
        if (m.flattening_nuclear > report.lower) {
            report.lower      = m.flattening_nuclear;
            report.lower_mode = m.mode;
        }
        if (m.refined_upper < report.upper) {
            report.upper      = m.refined_upper;
            report.upper_mode = m.mode;
        }
    }
    report.hash_norm = total / static_cast<double>(a.order());
    report.hs_upper  = hs_upper_bound(a);

    if (a.order() == 3 && !a.is_zero()) {
        for (std::size_t m = 1; m <= 3 && !report.certificate; ++m) {
            report.certificate = certify_tightness(a, m, tol, opts);
        }
    }
    return report;
}

} // namespace nucbound

#endif // NUCBOUND_BOUNDS_HPP
