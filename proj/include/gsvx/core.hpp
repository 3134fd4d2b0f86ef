#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gsvx {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Base of all library errors. `name()` is the stable error identifier that
/// the CLI prints alongside diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define GSVX_ERROR(NAME)                                      \
    struct NAME : Error {                                     \
        explicit NAME(const std::string& w) : Error(#NAME, w) {} \
    }

GSVX_ERROR(RankDeficient);
GSVX_ERROR(DimensionMismatch);
GSVX_ERROR(NotPositiveDefinite);
GSVX_ERROR(IndexOutOfRange);
GSVX_ERROR(RankDeficientStep);
GSVX_ERROR(NotConverged);
GSVX_ERROR(LineSearchStalled);
GSVX_ERROR(InvalidIndex);
GSVX_ERROR(InconsistentSolves);
GSVX_ERROR(MissingIndices);
GSVX_ERROR(InvalidDims);
GSVX_ERROR(ParseError);
GSVX_ERROR(NonFinite);
GSVX_ERROR(IoError);

#undef GSVX_ERROR

/// Real inner product Re tr(Y^H X) that turns C^{m x i} into a real inner
/// product space; all manifold geometry below is with respect to it.
template <typename DerivedX, typename DerivedY>
double real_inner(const Eigen::MatrixBase<DerivedX>& x,
                  const Eigen::MatrixBase<DerivedY>& y) {
    return Eigen::numext::real((y.conjugate().cwiseProduct(x)).sum());
}

namespace detail {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

}  // namespace detail

/// Deterministic random source. mt19937_64 together with hand-rolled
/// uniform/normal transforms keeps output bitwise reproducible across
/// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform draw in (0, 1).
    double uniform() {
        double u = 0.0;
        do {
            u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        } while (u <= 0.0);
        return u;
    }

    /// Standard normal via Box-Muller.
    double gaussian() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

    template <typename Scalar>
    Scalar gaussian_scalar() {
        if constexpr (detail::is_complex<Scalar>::value) {
            const double re = gaussian();
            const double im = gaussian();
            return Scalar(re, im);
        } else {
            return static_cast<Scalar>(gaussian());
        }
    }

    template <typename Scalar>
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gaussian_matrix(Index rows, Index cols) {
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) out(i, j) = gaussian_scalar<Scalar>();
        return out;
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Spectral norm estimate by power iteration on A^H A. Good to a few digits,
/// which is all the breakdown/convergence thresholds need.
template <typename Derived>
double spectral_norm_estimate(const Eigen::MatrixBase<Derived>& a,
                              int iters = 20, std::uint64_t seed = 12345) {
    using Scalar = typename Derived::Scalar;
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Rng rng(seed);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v =
        rng.gaussian_matrix<Scalar>(a.cols(), 1);
    double norm = 0.0;
    v.normalize();
    for (int it = 0; it < iters; ++it) {
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = a * v;
        norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = a.adjoint() * w;
        const double vn = v.norm();
        if (vn == 0.0) return norm;
        v /= vn;
    }
    return norm;
}

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

/// Complement of alpha (or beta) on the unit quarter circle.
inline double unit_complement(double x) {
    const double c = clamp01(x);
    return std::sqrt(std::max(0.0, 1.0 - c * c));
}

}  // namespace gsvx
