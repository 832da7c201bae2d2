#ifndef NUCBOUND_TENSOR_HPP
#define NUCBOUND_TENSOR_HPP

#include <nucbound/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nucbound {

using Shape = std::vector<std::size_t>;

namespace detail {

inline std::string shape_to_string(std::span<const std::size_t> shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out += (i ? "," : "") + std::to_string(shape[i]);
    }
    return out + ")";
}

inline std::size_t product(std::span<const std::size_t> dims) { return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{}); }

inline void require_finite(std::span<const double> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorKind::NonFiniteEntry, std::string(what) + ": entry " + std::to_string(i) + " is not finite");
        }
    }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace detail

/// Dense real N-tensor in lexicographic storage: the last index varies fastest.
///
/// Element indices are zero-based; mode numbers throughout the library are
/// one-based (mode 1 is the first axis).
class DenseTensor {
public:
    DenseTensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_.empty()) {
            throw Error(ErrorKind::ShapeDataMismatch, "tensor order must be at least 1");
        }
        if (std::find(shape_.begin(), shape_.end(), std::size_t{0}) != shape_.end()) {
            throw Error(ErrorKind::ShapeDataMismatch, "dimensions must be positive, got " + detail::shape_to_string(shape_));
        }
        if (detail::product(shape_) != data_.size()) {
            throw Error(ErrorKind::ShapeDataMismatch, "shape " + detail::shape_to_string(shape_) + " needs " + std::to_string(detail::product(shape_)) + " entries, got " + std::to_string(data_.size()));
        }
        detail::require_finite(data_, "tensor");
    }

    static DenseTensor zeros(Shape shape) {
        const std::size_t n = detail::product(shape);
        return DenseTensor(std::move(shape), std::vector<double>(n, 0.0));
    }

    [[nodiscard]] const Shape&           shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t            order() const noexcept { return shape_.size(); }
    [[nodiscard]] std::size_t            size() const noexcept { return data_.size(); }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] std::size_t linear_index(std::span<const std::size_t> index) const {
        if (index.size() != shape_.size()) {
            throw Error(ErrorKind::ShapeMismatch, "index has " + std::to_string(index.size()) + " components for an order-" + std::to_string(order()) + " tensor");
        }
        std::size_t linear = 0;
        for (std::size_t k = 0; k < shape_.size(); ++k) {
            if (index[k] >= shape_[k]) {
                throw Error(ErrorKind::ShapeMismatch, "index out of range in mode " + std::to_string(k + 1));
            }
            linear = linear * shape_[k] + index[k];
        }
        return linear;
    }

    [[nodiscard]] double at(std::span<const std::size_t> index) const { return data_[linear_index(index)]; }
    [[nodiscard]] double at(std::initializer_list<std::size_t> index) const { return at(std::span<const std::size_t>(index.begin(), index.size())); }

    [[nodiscard]] DenseTensor scaled(double c) const {
        std::vector<double> out(data_);
        for (double& v : out) {
            v *= c;
        }
        return DenseTensor(shape_, std::move(out));
    }

    [[nodiscard]] bool is_zero() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
    }

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Shape               shape_;
    std::vector<double> data_;
};

/// Real matrix, row-major.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (rows_ == 0 || cols_ == 0) {
            throw Error(ErrorKind::ShapeDataMismatch, "matrix dimensions must be positive");
        }
        if (data_.size() != rows_ * cols_) {
            throw Error(ErrorKind::ShapeDataMismatch, std::to_string(rows_) + "x" + std::to_string(cols_) + " matrix needs " + std::to_string(rows_ * cols_) + " entries, got " + std::to_string(data_.size()));
        }
        detail::require_finite(data_, "matrix");
    }

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols, std::vector<double>(rows * cols, 0.0)); }

    [[nodiscard]] std::size_t             rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t             cols() const noexcept { return cols_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] double                  operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    [[nodiscard]] double&                 operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    [[nodiscard]] Matrix transposed() const {
        std::vector<double> out(data_.size());
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                out[c * rows_ + r] = data_[r * cols_ + c];
            }
        }
        return Matrix(cols_, rows_, std::move(out));
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t         rows_;
    std::size_t         cols_;
    std::vector<double> data_;
};

[[nodiscard]] inline DenseTensor make_tensor(Shape shape, std::vector<double> data) { return DenseTensor(std::move(shape), std::move(data)); }

[[nodiscard]] inline double inner_product(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) {
        throw Error(ErrorKind::ShapeMismatch, "inner product of " + detail::shape_to_string(a.shape()) + " and " + detail::shape_to_string(b.shape()));
    }
    return detail::dot(a.data(), b.data());
}

/// Hilbert-Schmidt norm: square root of the sum of squared entries.
[[nodiscard]] inline double hs_norm(const DenseTensor& a) { return detail::norm2(a.data()); }

[[nodiscard]] inline double frobenius_norm(const Matrix& m) { return detail::norm2(m.data()); }

/// Outer product v1 ⊗ ... ⊗ vN; entry (i1..iN) is the product of v_k[i_k].
[[nodiscard]] inline DenseTensor rank_one(std::span<const std::vector<double>> vectors) {
    if (vectors.empty()) {
        throw Error(ErrorKind::EmptyVector, "rank_one needs at least one factor");
    }
    Shape shape;
    for (const auto& v : vectors) {
        if (v.empty()) {
            throw Error(ErrorKind::EmptyVector, "rank_one factor " + std::to_string(shape.size() + 1) + " is empty");
        }
        detail::require_finite(v, "rank_one factor");
        shape.push_back(v.size());
    }
    std::vector<double> data{1.0};
    for (const auto& v : vectors) {
        std::vector<double> next;
        next.reserve(data.size() * v.size());
        for (double d : data) {
            for (double x : v) {
                next.push_back(d * x);
            }
        }
        data = std::move(next);
    }
    return DenseTensor(std::move(shape), std::move(data));
}

[[nodiscard]] inline DenseTensor rank_one(std::initializer_list<std::vector<double>> vectors) { return rank_one(std::span<const std::vector<double>>(vectors.begin(), vectors.size())); }

namespace detail {

inline void check_mode(std::size_t order, std::size_t mode) {
    if (mode < 1 || mode > order) {
        throw Error(ErrorKind::ModeOutOfRange, "mode " + std::to_string(mode) + " is not in 1.." + std::to_string(order));
    }
}

/// Storage viewed as [outer][I_mode][inner] for a one-based mode.
struct ModeSplit {
    std::size_t outer;
    std::size_t extent;
    std::size_t inner;
};

inline ModeSplit split_at_mode(const Shape& shape, std::size_t mode) {
    const auto m = mode - 1;
    return {product(std::span(shape).first(m)), shape[m], product(std::span(shape).subspan(m + 1))};
}

} // namespace detail

/// Dimensions of the modes other than `mode`, in increasing mode order.
[[nodiscard]] inline Shape remaining_shape(const Shape& shape, std::size_t mode) {
    detail::check_mode(shape.size(), mode);
    Shape out;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k + 1 != mode) {
            out.push_back(shape[k]);
        }
    }
    return out;
}

/// Mode-m flattening: rows indexed by mode m, columns by the lexicographic rank
/// of the remaining multi-index (remaining modes in increasing order).
[[nodiscard]] inline Matrix flatten(const DenseTensor& a, std::size_t mode) {
    detail::check_mode(a.order(), mode);
    const auto [outer, extent, inner] = detail::split_at_mode(a.shape(), mode);
    const auto          src            = a.data();
    const std::size_t   cols           = outer * inner;
    std::vector<double> out(a.size());
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < extent; ++i) {
            for (std::size_t n = 0; n < inner; ++n) {
                out[i * cols + o * inner + n] = src[(o * extent + i) * inner + n];
            }
        }
    }
    return Matrix(extent, cols, std::move(out));
}

/// Inverse of flatten for the given target shape and mode.
[[nodiscard]] inline DenseTensor unflatten(const Matrix& m, const Shape& shape, std::size_t mode) {
    detail::check_mode(shape.size(), mode);
    if (std::find(shape.begin(), shape.end(), std::size_t{0}) != shape.end()) {
        throw Error(ErrorKind::ShapeMismatch, "dimensions must be positive, got " + detail::shape_to_string(shape));
    }
    const auto [outer, extent, inner] = detail::split_at_mode(shape, mode);
    if (m.rows() != extent || m.cols() != outer * inner) {
        throw Error(ErrorKind::ShapeMismatch, std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " matrix does not flatten shape " + detail::shape_to_string(shape) + " in mode " + std::to_string(mode));
    }
    std::vector<double> out(m.data().size());
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < extent; ++i) {
            for (std::size_t n = 0; n < inner; ++n) {
                out[(o * extent + i) * inner + n] = m(i, o * inner + n);
            }
        }
    }
    return DenseTensor(shape, std::move(out));
}

/// Reinterpret a flattening column-space vector as a tensor over the remaining modes.
[[nodiscard]] inline DenseTensor reshape_fiber(std::span<const double> z, const Shape& remaining) {
    if (remaining.empty() || detail::product(remaining) != z.size()) {
        throw Error(ErrorKind::ShapeDataMismatch, "vector of length " + std::to_string(z.size()) + " does not fill shape " + detail::shape_to_string(remaining));
    }
    return DenseTensor(remaining, std::vector<double>(z.begin(), z.end()));
}

/// View an order-2 tensor as a matrix.
[[nodiscard]] inline Matrix as_matrix(const DenseTensor& a) {
    if (a.order() != 2) {
        throw Error(ErrorKind::InvalidOrder, "as_matrix needs an order-2 tensor");
    }
    return Matrix(a.shape()[0], a.shape()[1], std::vector<double>(a.data().begin(), a.data().end()));
}

/// Result mode k is input mode perm[k] (both zero-based positions).
[[nodiscard]] inline DenseTensor permute_modes(const DenseTensor& a, std::span<const std::size_t> perm) {
    const std::size_t n = a.order();
    if (perm.size() != n) {
        throw Error(ErrorKind::ShapeMismatch, "permutation length does not match tensor order");
    }
    std::vector<bool> seen(n, false);
    for (auto p : perm) {
        if (p >= n || seen[p]) {
            throw Error(ErrorKind::InvalidArgument, "not a permutation of the tensor modes");
        }
        seen[p] = true;
    }
    Shape out_shape(n);
    for (std::size_t k = 0; k < n; ++k) {
        out_shape[k] = a.shape()[perm[k]];
    }
    std::vector<std::size_t> in_strides(n, 1);
    for (std::size_t k = n - 1; k > 0; --k) {
        in_strides[k - 1] = in_strides[k] * a.shape()[k];
    }
    std::vector<double>      out(a.size());
    std::vector<std::size_t> idx(n, 0);
    const auto               src = a.data();
    for (std::size_t linear = 0; linear < out.size(); ++linear) {
        std::size_t source = 0;
        for (std::size_t k = 0; k < n; ++k) {
            source += idx[k] * in_strides[perm[k]];
        }
        out[linear] = src[source];
        for (std::size_t k = n; k-- > 0;) {
            if (++idx[k] < out_shape[k]) {
                break;
            }
            idx[k] = 0;
        }
    }
    return DenseTensor(std::move(out_shape), std::move(out));
}

} // namespace nucbound

#endif // NUCBOUND_TENSOR_HPP
