#include "hebbdim/landscape.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "hebbdim/error.hpp"

namespace hebbdim {

CriticalCensus census(int n) {
  if (n < 1) throw InvalidArgument("census: n must be >= 1");
  CriticalCensus c;
  c.n = n;
  if (n == 1) {
    c.minima = 2;
    return c;
  }
  BigCount pow2 = 1, pow3 = 1;
  for (int i = 0; i < n; ++i) {
    pow2 *= 2;
    pow3 *= 3;
  }
  c.minima = 2 * BigCount(n);
  c.maxima = pow2;
  c.saddles = pow3 - pow2 - 2 * BigCount(n) - 1;
  return c;
}

std::string to_string(PointKind kind) {
  switch (kind) {
    case PointKind::Minimum:
      return "minimum";
    case PointKind::Maximum:
      return "maximum";
    case PointKind::Saddle:
      return "saddle";
    case PointKind::Indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

std::vector<CriticalPoint> enumerate_critical_points(int n) {
  if (n < 1 || n > kMaxEnumerationDim) {
    throw InvalidArgument("enumerate_critical_points: need 1 <= n <= 12");
  }
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) total *= 3;

  std::vector<CriticalPoint> points;
  points.reserve(static_cast<std::size_t>(total - 1));
  std::vector<int> digits(n, 0);
  for (std::int64_t code = 1; code < total; ++code) {
    // Increment the base-3 counter; digit 1 -> +1, digit 2 -> -1.
    for (int i = 0; i < n; ++i) {
      if (++digits[i] < 3) break;
      digits[i] = 0;
    }
    CriticalPoint p;
    p.direction = Eigen::VectorXd::Zero(n);
    int nonzero = 0;
    for (int i = 0; i < n; ++i) {
      if (digits[i] != 0) {
        p.direction[i] = digits[i] == 1 ? 1.0 : -1.0;
        ++nonzero;
      }
    }
    p.direction /= std::sqrt(static_cast<double>(nonzero));
    if (nonzero == 1) {
      p.kind = PointKind::Minimum;
      p.signature = {0, 0, n - 1};
    } else if (nonzero == n) {
      p.kind = PointKind::Maximum;
      p.signature = {n - 1, 0, 0};
    } else {
      p.kind = PointKind::Saddle;
      p.signature = {nonzero - 1, 0, n - nonzero};
    }
    points.push_back(std::move(p));
  }
  return points;
}

namespace {

void check_unit(const Eigen::VectorXd& w, const char* where) {
  if (std::abs(w.norm() - 1.0) > 1e-8) {
    throw InvalidArgument(std::string(where) + ": w must have unit norm");
  }
}

double mean_of(const Eigen::VectorXd& v) { return v.mean(); }

double se_of(const Eigen::VectorXd& v) {
  const double n = static_cast<double>(v.size());
  if (n < 2) return 0.0;
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / (n - 1.0) / n);
}

}  // namespace

Eigen::VectorXd objective_samples(const RowMatrix& inputs, const Eigen::VectorXd& w,
                                  double threshold) {
  const Eigen::VectorXd u = inputs * w;
  return u.unaryExpr([threshold](double v) { return rectifier_objective(v, threshold); });
}

ObjectiveEstimate objective_and_gradient(const RowMatrix& inputs, const Eigen::VectorXd& w,
                                         double threshold) {
  check_unit(w, "objective_and_gradient");
  if (inputs.cols() != w.size() || inputs.rows() < 2) {
    throw InvalidArgument("objective_and_gradient: batch shape mismatch");
  }
  const Eigen::Index n = inputs.rows();
  const Eigen::VectorXd u = inputs * w;
  const Eigen::VectorXd f = u.unaryExpr([threshold](double v) { return rectifier(v, threshold); });
  const Eigen::VectorXd F = 0.5 * f.array().square();

  // Per-sample tangent gradient f(u) (x - u w).
  const Eigen::VectorXd g = inputs.transpose() * f / static_cast<double>(n);
  const double gw = g.dot(w);
  ObjectiveEstimate est;
  est.value = mean_of(F);
  est.value_se = se_of(F);
  est.gradient = g - gw * w;

  const Eigen::VectorXd uf = u.cwiseProduct(f);
  Eigen::VectorXd second = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (f[i] == 0.0) continue;
    const Eigen::VectorXd gi = f[i] * inputs.row(i).transpose() - uf[i] * w;
    second += gi.cwiseProduct(gi);
  }
  const double nd = static_cast<double>(n);
  est.gradient_se =
      ((second / nd - est.gradient.cwiseProduct(est.gradient)).cwiseMax(0.0) * (nd / (nd - 1.0)) /
       nd)
          .cwiseSqrt();
  est.gradient_norm = est.gradient.norm();
  est.gradient_norm_se = est.gradient_se.norm();
  return est;
}

ObjectiveEstimate objective_and_gradient(const SourceSpec& spec, const Eigen::VectorXd& w,
                                         std::int64_t n_samples, Rng& rng, double threshold) {
  check_unit(w, "objective_and_gradient");
  if (n_samples < 2) throw InvalidArgument("objective_and_gradient: n_samples >= 2");
  if (w.size() != spec.n_inputs) throw InvalidArgument("objective_and_gradient: size mismatch");
  const RowMatrix inputs = sample(spec, static_cast<int>(n_samples), rng);
  return objective_and_gradient(inputs, w, threshold);
}

Eigen::VectorXd retract(const Eigen::VectorXd& w, const Eigen::VectorXd& v) {
  return (w + v).normalized();
}

Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& w) {
  const Eigen::Index n = w.size();
  const Eigen::MatrixXd column = w;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(column);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - 1);
}

CriticalPoint classify_point(const SourceSpec& spec, const Eigen::VectorXd& w,
                             std::int64_t n_samples, double step, Rng& rng, double threshold) {
  check_unit(w, "classify_point");
  if (!(step > 0.0)) throw InvalidArgument("classify_point: step must be > 0");
  if (n_samples < 2) throw InvalidArgument("classify_point: n_samples >= 2");
  const int n = spec.n_inputs;
  if (w.size() != n) throw InvalidArgument("classify_point: size mismatch");

  const RowMatrix inputs = sample(spec, static_cast<int>(n_samples), rng);
  const Eigen::MatrixXd basis = tangent_basis(w);
  const int m = n - 1;
  const double h = step;

  // Loss is -<F>; all evaluations share the same inputs.
  auto loss = [&](const Eigen::VectorXd& v) { return -objective_samples(inputs, v, threshold).mean(); };
  const double centre = loss(w);

  Eigen::MatrixXd hess(m, m);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd ei = basis.col(i);
    hess(i, i) = (loss(retract(w, h * ei)) - 2.0 * centre + loss(retract(w, -h * ei))) / (h * h);
    for (int j = i + 1; j < m; ++j) {
      const Eigen::VectorXd ej = basis.col(j);
      const double pp = loss(retract(w, h * (ei + ej)));
      const double pm = loss(retract(w, h * (ei - ej)));
      const double mp = loss(retract(w, h * (-ei + ej)));
      const double mm = loss(retract(w, -h * (ei + ej)));
      hess(i, j) = hess(j, i) = (pp - pm - mp + mm) / (4.0 * h * h);
    }
  }

  CriticalPoint point;
  point.direction = w;
  point.curvatures = Eigen::VectorXd::Zero(m);
  point.curvature_se = Eigen::VectorXd::Zero(m);
  if (m > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
    const Eigen::VectorXd f0 = objective_samples(inputs, w, threshold);
    for (int k = 0; k < m; ++k) {
      // Directional second difference along the eigenvector, per sample.
      const Eigen::VectorXd dir = basis * eig.eigenvectors().col(k);
      const Eigen::VectorXd fp = objective_samples(inputs, retract(w, h * dir), threshold);
      const Eigen::VectorXd fm = objective_samples(inputs, retract(w, -h * dir), threshold);
      const Eigen::VectorXd second = -(fp - 2.0 * f0 + fm) / (h * h);
      point.curvatures[k] = second.mean();
      point.curvature_se[k] = se_of(second);
    }
  }

  CurvatureSignature sig;
  for (int k = 0; k < m; ++k) {
    const double band = 3.0 * point.curvature_se[k];
    if (point.curvatures[k] < -band) {
      ++sig.negative;
    } else if (point.curvatures[k] > band) {
      ++sig.positive;
    } else {
      ++sig.zero;
    }
  }
  point.signature = sig;
  if (sig.zero > 0) {
    point.kind = PointKind::Indeterminate;
  } else if (sig.negative == 0) {
    point.kind = PointKind::Minimum;
  } else if (sig.positive == 0) {
    point.kind = PointKind::Maximum;
  } else {
    point.kind = PointKind::Saddle;
  }
  return point;
}

Eigen::Vector3d sphere_point(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

std::vector<FieldCell> sphere_gradient_field(const SourceSpec& spec, int resolution,
                                             std::int64_t n_samples, Rng& rng, double threshold) {
  if (spec.n_inputs != 3) throw InvalidArgument("sphere_gradient_field: requires N = 3");
  if (resolution < 3) throw InvalidArgument("sphere_gradient_field: resolution must be >= 3");
  if (n_samples < 2) throw InvalidArgument("sphere_gradient_field: n_samples >= 2");

  const RowMatrix inputs = sample(spec, static_cast<int>(n_samples), rng);
  const double step = std::numbers::pi / (resolution - 1);
  const int n_phi = 2 * (resolution - 1);
  const double inv_n = 1.0 / static_cast<double>(n_samples);

  std::vector<FieldCell> cells;
  cells.reserve(static_cast<std::size_t>(resolution - 2) * n_phi + 2);
  Eigen::VectorXd u(n_samples);
  for (int i = 0; i < resolution; ++i) {
    const double theta = step * i;
    // Each pole is a single point on the sphere.
    const int columns = (i == 0 || i == resolution - 1) ? 1 : n_phi;
    for (int j = 0; j < columns; ++j) {
      const double phi = step * j;
      const Eigen::Vector3d w = sphere_point(theta, phi);
      u.noalias() = inputs * w;
      Eigen::Vector3d g = Eigen::Vector3d::Zero();
      for (Eigen::Index r = 0; r < u.size(); ++r) {
        const double f = rectifier(u[r], threshold);
        if (f != 0.0) g += f * inputs.row(r).transpose();
      }
      g *= inv_n;
      const Eigen::Vector3d tangent = g - g.dot(w) * w;
      cells.push_back({theta, phi, tangent.norm()});
    }
  }
  return cells;
}

}  // namespace hebbdim
