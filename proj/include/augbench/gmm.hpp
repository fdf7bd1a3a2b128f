#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "augbench/log.hpp"
#include "augbench/matrix.hpp"
#include "augbench/rng.hpp"

namespace augbench {

namespace linalg {

// Lower Cholesky factor of a symmetric positive-definite matrix.
inline Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("cholesky: matrix is not square");
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw std::domain_error("cholesky: matrix is not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

// Solves L y = b in place for lower-triangular L.
inline void forward_substitute(const Matrix& l, std::span<double> b) {
  for (std::size_t i = 0; i < l.rows(); ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
    b[i] = s / l(i, i);
  }
}

inline double log_det_from_cholesky(const Matrix& l) {
  double s = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

// trace(A^-1) = ||L^-1||_F^2 for A = L L^T.
inline double inverse_trace_from_cholesky(const Matrix& l) {
  const std::size_t n = l.rows();
  double tr = 0.0;
  std::vector<double> e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    forward_substitute(l, e);
    for (double v : e) tr += v * v;
  }
  return tr;
}

}  // namespace linalg

struct GmmConfig {
  double covariance_floor = 1e-6;
  double tolerance = 1e-6;
  int max_iterations = 200;
  // When positive, K is chosen by BIC over 1..bic_max_components.
  std::size_t bic_max_components = 0;
};

struct GmmDiagnostics {
  double max_responsibility_sum_error = 0.0;
  double max_weight_sum_error = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Full-covariance Gaussian mixture fitted to one class.
///
/// The recorded objective is the floor-regularized log-likelihood
///   sum_i log sum_k pi_k N(x_i | mu_k, S_k) exp(-floor/2 * tr(S_k^-1)),
/// whose exact M-step is the weighted covariance plus floor * I. EM is
/// therefore monotone in it; for the default floor it differs from the plain
/// log-likelihood by O(floor).
struct GmmModel {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<Matrix> covariances;
  int class_label = 0;
  double covariance_floor = 1e-6;
  double final_log_likelihood = -std::numeric_limits<double>::infinity();
  std::vector<double> log_likelihood_history;
  GmmDiagnostics diagnostics;

  std::size_t components() const { return weights.size(); }
  std::size_t dimension() const { return means.empty() ? 0 : means.front().size(); }
};

namespace detail {

struct EStepResult {
  Matrix responsibilities;
  double objective = 0.0;
};

inline EStepResult gmm_e_step(const GmmModel& model, const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const std::size_t k_count = model.components();
  std::vector<Matrix> chol;
  std::vector<double> log_norm(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    chol.push_back(linalg::cholesky(model.covariances[k]));
    log_norm[k] = std::log(model.weights[k]) -
                  0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) +
                         linalg::log_det_from_cholesky(chol[k])) -
                  0.5 * model.covariance_floor * linalg::inverse_trace_from_cholesky(chol[k]);
  }
  EStepResult out{Matrix(n, k_count), 0.0};
  std::vector<double> diff(d);
  std::vector<double> logp(k_count);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = data.row(i);
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t j = 0; j < d; ++j) diff[j] = x[j] - model.means[k][j];
      linalg::forward_substitute(chol[k], diff);
      double q = 0.0;
      for (double v : diff) q += v * v;
      logp[k] = log_norm[k] - 0.5 * q;
    }
    const double mx = *std::max_element(logp.begin(), logp.end());
    double s = 0.0;
    for (double v : logp) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    out.objective += lse;
    auto r = out.responsibilities.row(i);
    for (std::size_t k = 0; k < k_count; ++k) r[k] = std::exp(logp[k] - lse);
  }
  return out;
}

inline void gmm_m_step(GmmModel& model, const Matrix& data, const Matrix& resp) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const std::size_t k_count = resp.cols();
  model.weights.assign(k_count, 0.0);
  model.means.assign(k_count, std::vector<double>(d, 0.0));
  model.covariances.assign(k_count, Matrix(d, d));
  for (std::size_t k = 0; k < k_count; ++k) {
    double nk = 0.0;
    for (std::size_t i = 0; i < n; ++i) nk += resp(i, k);
    model.weights[k] = nk / static_cast<double>(n);
    auto& mu = model.means[k];
    for (std::size_t i = 0; i < n; ++i) {
      const double r = resp(i, k);
      auto x = data.row(i);
      for (std::size_t j = 0; j < d; ++j) mu[j] += r * x[j];
    }
    for (auto& v : mu) v /= nk;
    auto& cov = model.covariances[k];
    std::vector<double> diff(d);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = resp(i, k);
      auto x = data.row(i);
      for (std::size_t j = 0; j < d; ++j) diff[j] = x[j] - mu[j];
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b <= a; ++b) cov(a, b) += r * diff[a] * diff[b];
    }
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b <= a; ++b) {
        cov(a, b) /= nk;
        cov(b, a) = cov(a, b);
      }
      cov(a, a) += model.covariance_floor;
    }
  }
  const double wsum = std::accumulate(model.weights.begin(), model.weights.end(), 0.0);
  for (auto& w : model.weights) w /= wsum;
  const double err =
      std::abs(std::accumulate(model.weights.begin(), model.weights.end(), 0.0) - 1.0);
  model.diagnostics.max_weight_sum_error = std::max(model.diagnostics.max_weight_sum_error, err);
}

inline std::size_t distinct_rows(const Matrix& data) {
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    auto r = data.row(i);
    seen.emplace(r.begin(), r.end());
  }
  return seen.size();
}

// Drops columns of `resp` whose total mass is below `min_mass` and renormalizes rows.
inline Matrix drop_empty_components(const Matrix& resp, double min_mass) {
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < resp.cols(); ++k) {
    double nk = 0.0;
    for (std::size_t i = 0; i < resp.rows(); ++i) nk += resp(i, k);
    if (nk >= min_mass) keep.push_back(k);
  }
  if (keep.size() == resp.cols()) return resp;
  warn("gmm: dropping " + std::to_string(resp.cols() - keep.size()) + " empty component(s)");
  Matrix out(resp.rows(), keep.size());
  for (std::size_t i = 0; i < resp.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < keep.size(); ++k) s += out(i, k) = resp(i, keep[k]);
    for (std::size_t k = 0; k < keep.size(); ++k) out(i, k) /= s;
  }
  return out;
}

inline GmmModel fit_gmm_fixed_k(const Matrix& data, std::size_t k_count, const GmmConfig& config,
                                RngStream rng) {
  const std::size_t n = data.rows();
  GmmModel model;
  model.covariance_floor = config.covariance_floor;

  // k-means++ seeding, then each row is hard-assigned to its nearest seed.
  // Seeds are distinct rows, so no component starts empty.
  std::vector<std::size_t> seeds{static_cast<std::size_t>(rng.below(n))};
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (seeds.size() < k_count) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(data.row(i), data.row(seeds.back())));
      total += d2[i];
    }
    double u = rng.uniform() * total;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      u -= d2[i];
      if (u < 0.0) break;
    }
    if (pick == n) throw std::invalid_argument("fit_gmm: fewer distinct rows than components");
    seeds.push_back(pick);
  }
  Matrix resp(n, k_count);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_count; ++k) {
      const double dk = squared_distance(data.row(i), data.row(seeds[k]));
      if (dk < best_d) best_d = dk, best = k;
    }
    resp(i, best) = 1.0;
  }

  double previous = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < config.max_iterations; ++it) {
    resp = drop_empty_components(resp, 1e-8);
    gmm_m_step(model, data, resp);
    auto e = gmm_e_step(model, data);
    for (std::size_t i = 0; i < n; ++i) {
      auto r = e.responsibilities.row(i);
      const double s = std::accumulate(r.begin(), r.end(), 0.0);
      model.diagnostics.max_responsibility_sum_error =
          std::max(model.diagnostics.max_responsibility_sum_error, std::abs(s - 1.0));
    }
    model.log_likelihood_history.push_back(e.objective);
    model.diagnostics.iterations = it + 1;
    resp = std::move(e.responsibilities);
    if (it > 0 && e.objective - previous < config.tolerance * std::max(1.0, std::abs(previous))) {
      model.diagnostics.converged = true;
      previous = e.objective;
      break;
    }
    previous = e.objective;
  }
  model.final_log_likelihood = previous;
  return model;
}

inline double gmm_bic(const GmmModel& m, std::size_t n) {
  const double k = static_cast<double>(m.components());
  const double d = static_cast<double>(m.dimension());
  const double params = (k - 1.0) + k * d + k * d * (d + 1.0) / 2.0;
  return -2.0 * m.final_log_likelihood + params * std::log(static_cast<double>(n));
}

}  // namespace detail

/// Fits a K-component mixture by EM. K is reduced (with a warning) when the
/// data has fewer distinct rows than K.
inline GmmModel fit_gmm(const FeatureMatrix& data, std::size_t components, const GmmConfig& config,
                        const RngStream& rng) {
  if (components < 1) throw std::invalid_argument("fit_gmm: K must be at least 1");
  if (data.rows() == 0 || data.cols() == 0) throw std::invalid_argument("fit_gmm: empty data");
  if (!(config.covariance_floor > 0.0)) {
    throw std::invalid_argument("fit_gmm: covariance floor must be positive");
  }
  if (config.bic_max_components > 0) {
    GmmModel best;
    double best_bic = std::numeric_limits<double>::infinity();
    GmmConfig plain = config;
    plain.bic_max_components = 0;
    for (std::size_t k = 1; k <= config.bic_max_components; ++k) {
      auto m = fit_gmm(data, k, plain, rng.derive("bic-k" + std::to_string(k)));
      const double bic = detail::gmm_bic(m, data.rows());
      if (bic < best_bic) {
        best_bic = bic;
        best = std::move(m);
      }
    }
    return best;
  }
  const std::size_t distinct = detail::distinct_rows(data);
  if (distinct < components) {
    warn("gmm: only " + std::to_string(distinct) + " distinct rows, reducing K from " +
         std::to_string(components) + " to " + std::to_string(distinct));
    components = distinct;
  }
  return detail::fit_gmm_fixed_k(data, components, config, rng);
}

inline FeatureMatrix sample_gmm(const GmmModel& model, std::int64_t n, const RngStream& rng) {
  if (n < 0) throw std::invalid_argument("sample_gmm: n must be nonnegative");
  const std::size_t d = model.dimension();
  FeatureMatrix out(static_cast<std::size_t>(n), d);
  if (n == 0) return out;
  std::vector<Matrix> chol;
  for (const auto& c : model.covariances) chol.push_back(linalg::cholesky(c));
  RngStream stream = rng;
  std::vector<double> z(d);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double u = stream.uniform();
    std::size_t k = 0;
    double cum = model.weights[0];
    while (k + 1 < model.components() && u >= cum) cum += model.weights[++k];
    for (auto& v : z) v = stream.normal();
    auto x = out.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      double s = model.means[k][a];
      for (std::size_t b = 0; b <= a; ++b) s += chol[k](a, b) * z[b];
      x[a] = s;
    }
  }
  return out;
}

}  // namespace augbench
