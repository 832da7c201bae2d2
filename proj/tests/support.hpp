#ifndef NUCBOUND_TESTS_SUPPORT_HPP
#define NUCBOUND_TESTS_SUPPORT_HPP

#include <nucbound/nucbound.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace nbtest {

using nucbound::DenseTensor;
using nucbound::Matrix;
using nucbound::Shape;

inline std::vector<double> normal_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double>              v(n);
    for (double& x : v) {
        x = g(rng);
    }
    return v;
}

inline std::vector<double> unit_vector(std::size_t n, std::mt19937_64& rng) {
    auto         v = normal_vector(n, rng);
    const double s = nucbound::detail::norm2(v);
    for (double& x : v) {
        x /= s;
    }
    return v;
}

inline DenseTensor random_tensor(const Shape& shape, std::mt19937_64& rng) { return DenseTensor(shape, normal_vector(nucbound::detail::product(shape), rng)); }

inline DenseTensor unit_hs(const DenseTensor& a) { return a.scaled(1.0 / nucbound::hs_norm(a)); }

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) { return Matrix(r, c, normal_vector(r * c, rng)); }

/// r orthonormal vectors in R^n from a Householder QR (independent of the library's SVD).
inline std::vector<std::vector<double>> orthonormal_set(std::size_t n, std::size_t r, std::mt19937_64& rng) {
    const auto      raw = normal_vector(n * r, rng);
    Eigen::MatrixXd g   = Eigen::Map<const Eigen::MatrixXd>(raw.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r));
    Eigen::MatrixXd q   = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r));
    std::vector<std::vector<double>> out(r, std::vector<double>(n));
    for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            out[j][i] = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
        }
    }
    return e;
}

/// Singular values from the eigenvalues of M M^T (or M^T M), descending.
inline std::vector<double> eigen_singular_values(const Matrix& m) {
    const Eigen::MatrixXd e    = to_eigen(m);
    const Eigen::MatrixXd gram = m.rows() <= m.cols() ? Eigen::MatrixXd(e * e.transpose()) : Eigen::MatrixXd(e.transpose() * e);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    std::vector<double>                            out;
    for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
        out.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i))));
    }
    return out;
}

/// sum_i J^{-1/2} 1 ⊗ e_i ⊗ e_i, shape 1 x J x J: nuclear norm sqrt(J).
inline DenseTensor sharp_instance(std::size_t j) {
    std::vector<double> data(j * j, 0.0);
    for (std::size_t i = 0; i < j; ++i) {
        data[i * j + i] = 1.0 / std::sqrt(static_cast<double>(j));
    }
    return DenseTensor({1, j, j}, std::move(data));
}

struct DiagonalDec {
    DenseTensor tensor;
    double      sigma_sum;
};

/// sum_i sigma_i x_i ⊗ u_i ⊗ v_i with orthonormal x, orthonormal u and unit v.
inline DiagonalDec diagonal_dec(std::size_t i, std::size_t j, std::size_t k, std::size_t r, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> sig(0.5, 3.0);
    const auto                             x = orthonormal_set(i, r, rng);
    const auto                             u = orthonormal_set(j, r, rng);
    std::vector<double>                    total(i * j * k, 0.0);
    double                                 sum = 0.0;
    for (std::size_t s = 0; s < r; ++s) {
        const double sigma = sig(rng);
        sum += sigma;
        const auto term = nucbound::rank_one({x[s], u[s], unit_vector(k, rng)});
        for (std::size_t n = 0; n < total.size(); ++n) {
            total[n] += sigma * term.data()[n];
        }
    }
    return {DenseTensor({i, j, k}, std::move(total)), sum};
}

/// Relative error, absolute when the reference is zero.
inline double rel_err(double got, double want) { return want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want); }

} // namespace nbtest

#endif // NUCBOUND_TESTS_SUPPORT_HPP
