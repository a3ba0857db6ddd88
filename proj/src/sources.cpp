#include "hebbdim/sources.hpp"

#include <Eigen/Eigenvalues>

#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "hebbdim/error.hpp"
#include "hebbdim/geometry.hpp"

namespace hebbdim {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

DistributionKind DistributionKind::parse(std::string_view text) {
  const std::string t = lower(text);
  if (t == "laplace" || t == "symmetric" || t == "sym") return laplace();
  if (t == "normal" || t == "gaussian") return normal();
  if (t == "chi2" || t == "asymmetric" || t == "asym") return chi_square();
  if (t.rfind("chi2:", 0) == 0) {
    const int q = std::stoi(t.substr(5));
    if (q < 1) throw InvalidArgument("chi2 degrees of freedom must be >= 1");
    return chi_square(q);
  }
  throw InvalidArgument("unknown distribution '" + std::string(text) + "'");
}

double DistributionKind::draw(Rng& rng) const {
  switch (family) {
    case Family::SymmetricLaplace: {
      // Inverse CDF of Laplace(0, 1/sqrt(2)).
      const double u = rng.uniform();
      const double b = 1.0 / std::numbers::sqrt2;
      return u < 0.5 ? b * std::log(2.0 * u) : -b * std::log(2.0 * (1.0 - u));
    }
    case Family::AsymmetricChiSquare: {
      double s = 0.0;
      for (int i = 0; i < dof; ++i) {
        const double z = rng.normal();
        s += z * z;
      }
      return (s - dof) / std::sqrt(2.0 * dof);
    }
    case Family::StandardNormal:
      return rng.normal();
  }
  return 0.0;
}

std::array<double, 4> DistributionKind::raw_moments() const {
  switch (family) {
    case Family::SymmetricLaplace:
      // k! b^k for even k with b = 1/sqrt(2).
      return {0.0, 1.0, 0.0, 6.0};
    case Family::AsymmetricChiSquare: {
      const double q = dof;
      return {0.0, 1.0, std::sqrt(8.0 / q), 3.0 + 12.0 / q};
    }
    case Family::StandardNormal:
      return {0.0, 1.0, 0.0, 3.0};
  }
  return {};
}

double DistributionKind::skewness() const { return raw_moments()[2]; }

double DistributionKind::excess_kurtosis() const { return raw_moments()[3] - 3.0; }

std::string DistributionKind::name() const {
  switch (family) {
    case Family::SymmetricLaplace:
      return "laplace";
    case Family::AsymmetricChiSquare:
      return dof == 10 ? "chi2" : "chi2:" + std::to_string(dof);
    case Family::StandardNormal:
      return "normal";
  }
  return "unknown";
}

Eigen::MatrixXd SourceSpec::mixing_vectors() const {
  if (!cardinal()) return mixing;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_inputs, n_features);
  for (int i = 0; i < n_features; ++i) w(i, i) = 1.0;
  return w;
}

SourceSpec make_source(int n_inputs, int n_features, DistributionKind kind,
                       std::uint64_t seed) {
  if (n_inputs < 1 || n_features < 1) {
    throw InvalidArgument("make_source: dimensions must be >= 1");
  }
  if (kind.family == Family::AsymmetricChiSquare && kind.dof < 1) {
    throw InvalidArgument("make_source: chi2 degrees of freedom must be >= 1");
  }
  SourceSpec spec;
  spec.n_inputs = n_inputs;
  spec.n_features = n_features;
  spec.kind = kind;
  if (n_features <= n_inputs) return spec;

  Rng rng(seed);
  for (int attempt = 0; attempt < kWhitenerRetries; ++attempt) {
    Eigen::MatrixXd w(n_inputs, n_features);
    for (int i = 0; i < n_features; ++i) w.col(i) = random_unit_vector(n_inputs, rng);

    const Eigen::MatrixXd cov = w * w.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < 1e-12) continue;

    const Eigen::VectorXd inv_sqrt = eig.eigenvalues().array().rsqrt();
    Eigen::MatrixXd whitener =
        eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    spec.projection = whitener * w;
    spec.mixing = std::move(w);
    spec.whitener = std::move(whitener);
    return spec;
  }
  throw NumericalError("make_source: mixing covariance singular after retries");
}

void sample_into(const SourceSpec& spec, Rng& rng, Eigen::Ref<Eigen::VectorXd> x,
                 Eigen::VectorXd& latent) {
  if (spec.cardinal()) {
    for (int i = 0; i < spec.n_features; ++i) x[i] = spec.kind.draw(rng);
    for (int i = spec.n_features; i < spec.n_inputs; ++i) x[i] = rng.normal();
    return;
  }
  latent.resize(spec.n_features);
  for (int i = 0; i < spec.n_features; ++i) latent[i] = spec.kind.draw(rng);
  x.noalias() = spec.projection * latent;
}

RowMatrix sample(const SourceSpec& spec, int count, Rng& rng) {
  if (count < 1) throw InvalidArgument("sample: count must be >= 1");
  RowMatrix out(count, spec.n_inputs);
  Eigen::VectorXd x(spec.n_inputs);
  Eigen::VectorXd latent;
  for (int r = 0; r < count; ++r) {
    sample_into(spec, rng, x, latent);
    out.row(r) = x.transpose();
  }
  return out;
}

Eigen::MatrixXd hidden_features(const SourceSpec& spec) {
  if (spec.cardinal()) return spec.mixing_vectors();
  Eigen::MatrixXd f = spec.projection;
  for (int i = 0; i < f.cols(); ++i) f.col(i).normalize();
  return f;
}

}  // namespace hebbdim
