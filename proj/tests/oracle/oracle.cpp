#include "oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rpsd::oracle {
namespace {

constexpr std::size_t kMaxOutcomes = 10000;

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return r;
}

void combinations(const std::vector<std::size_t>& pool, std::size_t s, std::size_t start,
                  std::vector<std::size_t>& current, std::vector<std::vector<std::size_t>>& out) {
  if (current.size() == s) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start; i < pool.size(); ++i) {
    current.push_back(pool[i]);
    combinations(pool, s, i + 1, current, out);
    current.pop_back();
  }
}

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

OracleReport report(std::string name, double max_error, double tolerance) {
  return {std::move(name), max_error, tolerance, max_error <= tolerance};
}

std::vector<Outcome> enumerate_outcomes(const SelectionLaw& law) {
  std::vector<Outcome> out;
  if (const auto* b = std::get_if<BernoulliLaw>(&law)) {
    std::vector<std::size_t> random_members, always;
    for (std::size_t i = 0; i < b->p.size(); ++i) {
      if (b->p[i] >= 1.0) always.push_back(i);
      else if (b->p[i] > 0.0) random_members.push_back(i);
    }
    if (random_members.size() > 13) throw std::length_error("too many outcomes to enumerate");
    const std::size_t total = std::size_t{1} << random_members.size();
    for (std::size_t mask = 0; mask < total; ++mask) {
      Outcome o;
      o.probability = 1.0;
      o.chosen = always;
      for (std::size_t j = 0; j < random_members.size(); ++j) {
        const double p = b->p[random_members[j]];
        if (mask >> j & 1U) {
          o.chosen.push_back(random_members[j]);
          o.probability *= p;
        } else {
          o.probability *= 1.0 - p;
        }
      }
      std::sort(o.chosen.begin(), o.chosen.end());
      out.push_back(std::move(o));
    }
    return out;
  }
  const auto& f = std::get<FixedSampleSizeLaw>(law);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < f.family_size; ++i)
    if (!std::binary_search(f.forced.begin(), f.forced.end(), i)) pool.push_back(i);
  if (binomial(pool.size(), f.s) > static_cast<double>(kMaxOutcomes))
    throw std::length_error("too many outcomes to enumerate");
  std::vector<std::vector<std::size_t>> combos;
  std::vector<std::size_t> current;
  combinations(pool, f.s, 0, current, combos);
  for (auto& c : combos) {
    Outcome o;
    o.chosen = f.forced;
    o.chosen.insert(o.chosen.end(), c.begin(), c.end());
    std::sort(o.chosen.begin(), o.chosen.end());
    o.probability = 1.0 / static_cast<double>(combos.size());
    out.push_back(std::move(o));
  }
  return out;
}

Matrix projector(const SubspaceFamily& family, const std::vector<std::size_t>& chosen) {
  const Eigen::Index n = static_cast<Eigen::Index>(family.dimension());
  Matrix basis;
  if (family.kind() == FamilyKind::Axes) {
    if (chosen.empty()) return Matrix::Zero(n, n);
    basis = Matrix::Zero(n, static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t j = 0; j < chosen.size(); ++j)
      basis(static_cast<Eigen::Index>(chosen[j]), static_cast<Eigen::Index>(j)) = 1.0;
  } else {
    // C_i = span{1, step after position i}; the sum over chosen i adds the steps.
    basis = Matrix::Zero(n, static_cast<Eigen::Index>(chosen.size()) + 1);
    basis.col(0).setOnes();
    for (std::size_t j = 0; j < chosen.size(); ++j)
      for (Eigen::Index r = static_cast<Eigen::Index>(chosen[j]) + 1; r < n; ++r)
        basis(r, static_cast<Eigen::Index>(j) + 1) = 1.0;
  }
  Eigen::JacobiSVD<Matrix> svd(basis, Eigen::ComputeThinU);
  const Eigen::Index rank = (svd.singularValues().array() > 1e-10).count();
  const Matrix u = svd.matrixU().leftCols(rank);
  return u * u.transpose();
}

Matrix enumerate_average_projection(const SubspaceFamily& family, const SelectionLaw& law) {
  const Eigen::Index n = static_cast<Eigen::Index>(family.dimension());
  Matrix sum = Matrix::Zero(n, n);
  for (const Outcome& o : enumerate_outcomes(law)) sum += o.probability * projector(family, o.chosen);
  return sum;
}

std::vector<double> enumerate_inclusion(const SelectionLaw& law) {
  const std::size_t m = std::holds_alternative<BernoulliLaw>(law) ? std::get<BernoulliLaw>(law).p.size()
                                                                   : std::get<FixedSampleSizeLaw>(law).family_size;
  std::vector<double> probs(m, 0.0);
  for (const Outcome& o : enumerate_outcomes(law))
    for (std::size_t i : o.chosen) probs[i] += o.probability;
  return probs;
}

Matrix inverse_sqrt(const Matrix& p) {
  Eigen::JacobiSVD<Matrix> svd(p, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector s = svd.singularValues().array().rsqrt();
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

double largest_squared_singular_value(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const double s = svd.singularValues()(0);
  return s * s;
}

Vector brute_prox(const Regularizer& reg, double gamma, const Vector& u) {
  const Eigen::Index n = u.size();
  if (n > 8) throw std::length_error("brute_prox is limited to n <= 8");
  if (const auto* l1 = std::get_if<L1Norm>(&reg)) {
    // Dual: w in the box of radius gamma*lambda, y = u - w. One projected step is exact.
    const double r = gamma * l1->lambda;
    Vector w = u.cwiseMax(-r).cwiseMin(r);
    return u - w;
  }
  if (const auto* gl = std::get_if<GroupL1L2>(&reg)) {
    const double r = gamma * gl->lambda;
    Vector y = u;
    for (const auto& group : gl->groups) {
      double norm = 0.0;
      for (std::size_t i : group) norm += u[static_cast<Eigen::Index>(i)] * u[static_cast<Eigen::Index>(i)];
      norm = std::sqrt(norm);
      const double scale = norm > r ? r / norm : 1.0;  // w_b = proj of u_b on the ball
      for (std::size_t i : group) y[static_cast<Eigen::Index>(i)] -= scale * u[static_cast<Eigen::Index>(i)];
    }
    return y;
  }
  const double r = gamma * std::get<TotalVariation1D>(reg).lambda;
  if (n < 2) return u;
  // Dual of min r*||Dy||_1 + ||y-u||^2/2: min ||u - D^T w||^2/2 over |w| <= r.
  Vector w = Vector::Zero(n - 1);
  Vector y = u;
  for (int it = 0; it < 100000; ++it) {
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double next = w[i] + 0.25 * (y[i + 1] - y[i]);
      w[i] = std::clamp(next, -r, r);
    }
    // y = u - D^T w, with (D^T w)_j = w_{j-1} - w_j
    for (Eigen::Index j = 0; j < n; ++j) {
      double dtw = 0.0;
      if (j > 0) dtw += w[j - 1];
      if (j + 1 < n) dtw -= w[j];
      y[j] = u[j] - dtw;
    }
  }
  return y;
}

TvEnumeration tv_enumerate(double weight, const Vector& u) {
  const Eigen::Index n = u.size();
  if (n > 10) throw std::length_error("tv_enumerate is limited to n <= 10");
  const auto objective = [&](const Vector& y) {
    double v = 0.5 * (y - u).squaredNorm();
    for (Eigen::Index i = 0; i + 1 < n; ++i) v += weight * std::abs(y[i + 1] - y[i]);
    return v;
  };
  TvEnumeration best;
  double best_value = INFINITY;
  const std::size_t breaks_total = n > 1 ? std::size_t{1} << (n - 1) : 1;
  for (std::size_t breaks = 0; breaks < breaks_total; ++breaks) {
    std::vector<Eigen::Index> starts{0};
    for (Eigen::Index i = 0; i + 1 < n; ++i)
      if (breaks >> i & 1U) starts.push_back(i + 1);
    starts.push_back(n);
    const std::size_t segments = starts.size() - 1;
    const std::size_t jumps = segments - 1;
    for (std::size_t signs = 0; signs < (std::size_t{1} << jumps); ++signs) {
      Vector y(n);
      for (std::size_t s = 0; s < segments; ++s) {
        const Eigen::Index a = starts[s], b = starts[s + 1];
        double mean = 0.0;
        for (Eigen::Index i = a; i < b; ++i) mean += u[i];
        mean /= static_cast<double>(b - a);
        // sign of the jump entering and leaving this segment (+1 = upward)
        const double left = s == 0 ? 0.0 : ((signs >> (s - 1) & 1U) ? 1.0 : -1.0);
        const double right = s + 1 == segments ? 0.0 : ((signs >> s & 1U) ? 1.0 : -1.0);
        const double c = mean - weight * (left - right) / static_cast<double>(b - a);
        for (Eigen::Index i = a; i < b; ++i) y[i] = c;
      }
      const double value = objective(y);
      if (value < best_value) {
        best_value = value;
        best.y = y;
      }
    }
  }
  best.jumps.assign(n > 0 ? static_cast<std::size_t>(n - 1) : 0, 0);
  const double scale = std::max(1.0, best.y.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    best.jumps[static_cast<std::size_t>(i)] = std::abs(best.y[i + 1] - best.y[i]) > 1e-9 * scale ? 1 : 0;
  return best;
}

double prox_objective(const Regularizer& reg, double gamma, const Vector& u, const Vector& y) {
  double g = 0.0;
  if (const auto* l1 = std::get_if<L1Norm>(&reg)) {
    g = l1->lambda * y.cwiseAbs().sum();
  } else if (const auto* gl = std::get_if<GroupL1L2>(&reg)) {
    for (const auto& group : gl->groups) {
      double sq = 0.0;
      for (std::size_t i : group) sq += y[static_cast<Eigen::Index>(i)] * y[static_cast<Eigen::Index>(i)];
      g += gl->lambda * std::sqrt(sq);
    }
  } else {
    const double lambda = std::get<TotalVariation1D>(reg).lambda;
    for (Eigen::Index i = 0; i + 1 < y.size(); ++i) g += lambda * std::abs(y[i + 1] - y[i]);
  }
  return g + (y - u).squaredNorm() / (2.0 * gamma);
}

Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector plus = x, minus = x;
    plus[i] += h;
    minus[i] -= h;
    g[i] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

double dense_value(Loss loss, const Matrix& a, const Vector& b, double lambda2, const Vector& x) {
  const double m = static_cast<double>(a.rows());
  const Vector ax = a * x;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (loss == Loss::LeastSquares) {
      sum += 0.5 * (ax[i] - b[i]) * (ax[i] - b[i]);
    } else {
      const double t = b[i] * ax[i];
      sum += t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
    }
  }
  return sum / m + 0.5 * lambda2 * x.squaredNorm();
}

Vector dense_gradient(Loss loss, const Matrix& a, const Vector& b, double lambda2, const Vector& x) {
  const double m = static_cast<double>(a.rows());
  const Vector ax = a * x;
  Vector r(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (loss == Loss::LeastSquares) {
      r[i] = ax[i] - b[i];
    } else {
      const double t = b[i] * ax[i];
      // d/dt log(1+e^{-t}) = -1/(1+e^t)
      const double sig = t > 0 ? std::exp(-t) / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));
      r[i] = -b[i] * sig;
    }
  }
  return a.transpose() * r / m + lambda2 * x;
}

std::pair<double, double> dense_constants(Loss loss, const Matrix& a, double lambda2) {
  const double m = static_cast<double>(a.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
  const double top = eig.eigenvalues().maxCoeff();
  const double bottom = std::max(0.0, eig.eigenvalues().minCoeff());
  if (loss == Loss::Logistic) return {top / (4.0 * m) + lambda2, lambda2};
  return {top / m + lambda2, bottom / m + lambda2};
}

std::vector<Vector> pgd_trajectory(Loss loss, const Matrix& a, const Vector& b, double lambda2, double lambda1,
                                   double gamma, std::size_t iters) {
  std::vector<Vector> traj;
  traj.reserve(iters + 1);
  Vector x = Vector::Zero(a.cols());
  traj.push_back(x);
  for (std::size_t k = 0; k < iters; ++k) {
    const Vector v = x - gamma * dense_gradient(loss, a, b, lambda2, x);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = soft(v[i], gamma * lambda1);
    traj.push_back(x);
  }
  return traj;
}

std::vector<Vector> coordinate_descent(Loss loss, const Matrix& a, const Vector& b, double lambda2,
                                       double lambda1, double gamma, std::size_t s, std::uint64_t seed,
                                       std::size_t iters) {
  const std::size_t n = static_cast<std::size_t>(a.cols());
  std::mt19937_64 rng(seed);
  std::vector<Vector> traj;
  Vector x = Vector::Zero(a.cols());
  traj.push_back(x);
  for (std::size_t k = 0; k < iters; ++k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t j = 0; j < s; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, n - 1);
      std::swap(idx[j], idx[pick(rng)]);
    }
    const Vector g = dense_gradient(loss, a, b, lambda2, x);
    Vector next = x;
    for (std::size_t j = 0; j < s; ++j) {
      const auto i = static_cast<Eigen::Index>(idx[j]);
      next[i] = soft(x[i] - gamma * g[i], gamma * lambda1);
    }
    x = next;
    traj.push_back(x);
  }
  return traj;
}

std::size_t smallest_gap(double a, double alpha, double beta) {
  std::size_t c = 1;
  while (a * std::pow(1.0 - alpha, static_cast<double>(c)) > 1.0 - beta) ++c;
  return c;
}

}  // namespace rpsd::oracle
