#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "beamform.hpp"
#include "geometry.hpp"
#include "types.hpp"

namespace rfeye {

struct MusicConfig {
    int num_sources = 1;
    int snapshots = 100;
    AngularGrid grid{};
};

inline Eigen::MatrixXcd covariance(const std::vector<std::vector<cplx>>& snapshots) {
    if (snapshots.empty()) throw Error(ErrorCode::DimensionMismatch, "no snapshots");
    const Eigen::Index n = static_cast<Eigen::Index>(snapshots.front().size());
    if (n == 0) throw Error(ErrorCode::DimensionMismatch, "empty snapshot");
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& s : snapshots) {
        if (static_cast<Eigen::Index>(s.size()) != n) throw Error(ErrorCode::DimensionMismatch, "snapshot lengths differ");
        const Eigen::Map<const Eigen::VectorXcd> v(s.data(), n);
        R.noalias() += v * v.adjoint();
    }
    R /= static_cast<double>(snapshots.size());
    // Exact Hermitian symmetry regardless of summation rounding.
    R = (0.5 * (R + R.adjoint())).eval();
    return R;
}

// Eigenvectors of the N - num_sources smallest eigenvalues, as columns.
inline Eigen::MatrixXcd noise_subspace(const Eigen::MatrixXcd& cov, int num_sources) {
    const Eigen::Index n = cov.rows();
    if (cov.cols() != n) throw Error(ErrorCode::DimensionMismatch, "covariance must be square");
    if (num_sources < 1 || num_sources >= n) throw Error(ErrorCode::InvalidConfig, "num_sources must be in [1, N)");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::InvalidConfig, "eigendecomposition failed");
    // Eigenvalues come back in increasing order.
    return es.eigenvectors().leftCols(n - num_sources);
}

inline constexpr double kMusicFloor = 1e-12;

// P = 1 / (a^H En En^H a) with a_k = exp(-j k p_k.u), the conjugate of the steering weight, normalized to a maximum of 1.
inline Beampattern music_spectrum(const Eigen::MatrixXcd& cov, const std::vector<Vec3>& positions, double lambda,
                                  const AngularGrid& grid = {}, int num_sources = 1) {
    const Eigen::Index n = static_cast<Eigen::Index>(positions.size());
    if (n == 0) throw Error(ErrorCode::EmptyArray, "no reception points");
    if (cov.rows() != n) throw Error(ErrorCode::DimensionMismatch, "covariance size differs from point count");
    const Eigen::MatrixXcd EnH = noise_subspace(cov, num_sources).adjoint();
    const double k = kTwoPi / lambda;
    Eigen::VectorXcd a(n);
    Beampattern bp = sweep_power(
        [&](const Vec3& u) {
            for (Eigen::Index i = 0; i < n; ++i) a[i] = std::polar(1.0, -k * dot(positions[static_cast<std::size_t>(i)], u));
            const double den = (EnH * a).squaredNorm();
            return 1.0 / std::max(den, kMusicFloor);
        },
        grid);
    if (bp.peak_value > 0) {
        const double inv = 1.0 / bp.peak_value;
        for (auto& v : bp.values)
            if (!std::isnan(v)) v *= inv;
        bp.peak_value = 1.0;
    }
    return bp;
}

} // namespace rfeye
