#include "mixtobit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mixtobit/distributions.hpp"
#include "mixtobit/errors.hpp"

namespace mixtobit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void MixtureParams::validate(Eigen::Index expected_p) const {
  if (components.empty()) {
    throw ValidationError("mixture: need at least one component");
  }
  if (weights.size() != n_components()) {
    throw ValidationError("mixture: weight count differs from components");
  }
  const Eigen::Index pp = expected_p >= 0 ? expected_p : p();
  for (const auto& comp : components) {
    if (comp.beta.size() != pp) {
      throw ValidationError("mixture: coefficient length mismatch");
    }
    if (!(comp.sigma2 > 0.0) || !std::isfinite(comp.sigma2)) {
      throw ValidationError("mixture: variances must be positive and finite");
    }
  }
  double total = 0.0;
  for (Eigen::Index c = 0; c < weights.size(); ++c) {
    if (!(weights[c] > 0.0)) {
      throw ValidationError("mixture: weights must be strictly positive");
    }
    total += weights[c];
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw ValidationError("mixture: weights must sum to 1");
  }
}

MixtureParams permute_components(const MixtureParams& params,
                                 const std::vector<int>& perm) {
  const int C = params.n_components();
  if (static_cast<int>(perm.size()) != C) {
    throw ValidationError("permute: permutation length mismatch");
  }
  std::vector<bool> seen(C, false);
  MixtureParams out;
  out.components.reserve(C);
  out.weights.resize(C);
  for (int j = 0; j < C; ++j) {
    const int c = perm[j];
    if (c < 0 || c >= C || seen[c]) {
      throw ValidationError("permute: not a permutation of component labels");
    }
    seen[c] = true;
    out.components.push_back(params.components[c]);
    out.weights[j] = params.weights[c];
  }
  return out;
}

double component_loglik_obs(Eigen::Index obs_index, const ObservationSet& data,
                            const ComponentParams& comp) {
  const double m = data.X.row(obs_index).dot(comp.beta);
  const double s = std::sqrt(comp.sigma2);
  switch (data.status(obs_index)) {
    case CensorStatus::kLeft:
      return log_normal_cdf((data.lower[obs_index] - m) / s);
    case CensorStatus::kRight:
      return log_normal_cdf((m - data.upper[obs_index]) / s);
    case CensorStatus::kInterior:
      return log_normal_pdf((data.y[obs_index] - m) / s) - std::log(s);
  }
  return kNegInf;
}

double mixture_loglik_obs(Eigen::Index obs_index, const ObservationSet& data,
                          const MixtureParams& params) {
  const int C = params.n_components();
  double shift = kNegInf;
  Eigen::VectorXd logs(C);
  for (int c = 0; c < C; ++c) {
    logs[c] = std::log(params.weights[c]) +
              component_loglik_obs(obs_index, data, params.components[c]);
    shift = std::max(shift, logs[c]);
  }
  if (shift == kNegInf) {
    throw EvaluationError("likelihood underflow at observation " +
                          std::to_string(obs_index));
  }
  double acc = 0.0;
  for (int c = 0; c < C; ++c) acc += std::exp(logs[c] - shift);
  return shift + std::log(acc);
}

double mixture_lik_obs(Eigen::Index obs_index, const ObservationSet& data,
                       const MixtureParams& params) {
  return std::exp(mixture_loglik_obs(obs_index, data, params));
}

Eigen::VectorXd pointwise_loglik(const ObservationSet& data,
                                 const MixtureParams& params) {
  params.validate(data.p());
  Eigen::VectorXd out(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out[i] = mixture_loglik_obs(i, data, params);
  }
  return out;
}

double dataset_loglik(const ObservationSet& data,
                      const MixtureParams& params) {
  return pointwise_loglik(data, params).sum();
}

CensoredDensity censored_density(double value, const Eigen::VectorXd& x,
                                 double lower, double upper,
                                 const MixtureParams& params) {
  if (!(lower < upper)) {
    throw ValidationError("censored density: lower bound must be below upper");
  }
  params.validate(x.size());
  CensoredDensity out;
  for (int c = 0; c < params.n_components(); ++c) {
    const ComponentParams& comp = params.components[c];
    const double m = x.dot(comp.beta);
    const double s = std::sqrt(comp.sigma2);
    const double w = params.weights[c];
    if (std::isfinite(lower)) {
      out.mass_at_lower += w * normal_cdf((lower - m) / s);
    }
    if (std::isfinite(upper)) {
      out.mass_at_upper += w * normal_cdf((m - upper) / s);
    }
    if (value > lower && value < upper) {
      out.continuous += w * normal_pdf((value - m) / s) / s;
    }
  }
  return out;
}

}  // namespace mixtobit
