#pragma once

#include <Eigen/Dense>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace resdeloc {

inline constexpr std::size_t kDenseOracleMaxSize = 1024;

// H_M = −(1/M)·ones + diag(κV), assembled explicitly.
inline Eigen::MatrixXd dense_hamiltonian(const PotentialSample& sample) {
    const auto M = static_cast<Eigen::Index>(sample.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Constant(M, M, -1.0 / static_cast<double>(M));
    for (Eigen::Index x = 0; x < M; ++x) H(x, x) += sample.kappa() * sample.raw_values[static_cast<std::size_t>(x)];
    return H;
}

// All eigenvalues of H_M by a symmetric eigensolver, ascending.
inline std::vector<double> dense_oracle(const PotentialSample& sample) {
    if (sample.size() > kDenseOracleMaxSize) throw SizeError("dense_oracle: M exceeds 1024");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_hamiltonian(sample), Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

}  // namespace resdeloc
