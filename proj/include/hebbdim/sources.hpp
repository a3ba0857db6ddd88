#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "hebbdim/rng.hpp"

namespace hebbdim {

enum class Family { SymmetricLaplace, AsymmetricChiSquare, StandardNormal };

/// Distribution of the latent variables. Every family is standardized
/// to mean 0 and variance 1.
struct DistributionKind {
  Family family = Family::SymmetricLaplace;
  int dof = 10;  // q, used by AsymmetricChiSquare only

  static DistributionKind laplace() { return {Family::SymmetricLaplace, 10}; }
  static DistributionKind chi_square(int q = 10) { return {Family::AsymmetricChiSquare, q}; }
  static DistributionKind normal() { return {Family::StandardNormal, 10}; }

  /// Accepts "laplace"/"symmetric", "chi2"/"asymmetric" (optionally
  /// "chi2:<q>"), and "normal"/"gaussian".
  static DistributionKind parse(std::string_view text);

  double draw(Rng& rng) const;

  /// E[l^k] for k = 1..4.
  std::array<double, 4> raw_moments() const;
  double skewness() const;
  double excess_kurtosis() const;
  bool is_latent() const { return family != Family::StandardNormal; }
  std::string name() const;

  friend bool operator==(const DistributionKind&, const DistributionKind&) = default;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Generative model x = M (sum_i w_i l_i [+ Gaussian filler]).
///
/// For K <= N the mixing vectors are the first K cardinal axes and
/// `mixing` is left empty; the remaining N - K coordinates carry
/// standard-normal filler. For K > N the columns of `mixing` are K random
/// unit vectors and `whitener` is the inverse square root of sum_i w_i w_i^T.
struct SourceSpec {
  int n_inputs = 0;
  int n_features = 0;
  DistributionKind kind;
  Eigen::MatrixXd mixing;                  // N x K, empty when cardinal
  std::optional<Eigen::MatrixXd> whitener; // nullopt means identity
  Eigen::MatrixXd projection;              // M * mixing, cached for sampling

  bool cardinal() const { return mixing.size() == 0; }
  int filler_dims() const { return cardinal() ? n_inputs - n_features : 0; }

  /// Columns are the mixing vectors w_i (materialized for the cardinal case).
  Eigen::MatrixXd mixing_vectors() const;
};

inline constexpr int kWhitenerRetries = 16;

SourceSpec make_source(int n_inputs, int n_features, DistributionKind kind,
                       std::uint64_t seed);

/// Writes one input vector into `x` (length n_inputs). `latent` is
/// scratch space of length n_features, only touched when K > N.
void sample_into(const SourceSpec& spec, Rng& rng, Eigen::Ref<Eigen::VectorXd> x,
                 Eigen::VectorXd& latent);

/// `count` inputs, one per row.
RowMatrix sample(const SourceSpec& spec, int count, Rng& rng);

/// Latent directions in whitened coordinates, normalize(M w_i), as columns.
Eigen::MatrixXd hidden_features(const SourceSpec& spec);

}  // namespace hebbdim
