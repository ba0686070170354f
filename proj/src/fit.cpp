#include "mixtobit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "mixtobit/errors.hpp"

namespace mixtobit {

namespace {

constexpr double kHighParetoK = 0.7;

Eigen::VectorXd total_loglik_per_draw(const DrawStore& store) {
  if (store.n_retained() < 1) {
    throw ValidationError("fit criteria: store holds no retained draws");
  }
  return store.pointwise.rowwise().sum();
}

int parameter_count(const DrawStore& store) {
  const int C = store.draws.front().n_components();
  const int p = static_cast<int>(store.draws.front().p());
  return (2 + p) * C - 1;
}

// log of the column mean of exp(ll), stabilized per observation
double log_mean_exp(const Eigen::VectorXd& ll) {
  const double shift = ll.maxCoeff();
  return shift + std::log((ll.array() - shift).exp().mean());
}

struct GpdFit {
  double k = 0.0;
  double sigma = 0.0;
  bool ok = false;
};

// Profile-posterior fit of the generalized Pareto to sorted positive
// exceedances (Zhang-Stephens estimator).
GpdFit fit_gpd(const std::vector<double>& x) {
  const int m_tail = static_cast<int>(x.size());
  GpdFit fit;
  const double x_max = x.back();
  const double x_quart =
      x[static_cast<int>(std::ceil(m_tail / 4.0 + 0.5)) - 1];
  if (!(x_quart > 0.0) || !(x_max > 0.0)) return fit;

  const int m = 30 + static_cast<int>(std::floor(std::sqrt(m_tail)));
  std::vector<double> theta(m), prof(m);
  for (int j = 1; j <= m; ++j) {
    theta[j - 1] = 1.0 / x_max +
                   (1.0 - std::sqrt(m / (j - 0.5))) / (3.0 * x_quart);
    double k = 0.0;
    for (double v : x) k += std::log1p(-theta[j - 1] * v);
    k = -k / m_tail;
    prof[j - 1] = m_tail * (std::log(theta[j - 1] / k) + k - 1.0);
  }
  const double shift = *std::max_element(prof.begin(), prof.end());
  if (!std::isfinite(shift)) return fit;
  double wsum = 0.0, theta_hat = 0.0;
  for (int j = 0; j < m; ++j) {
    const double w = std::exp(prof[j] - shift);
    wsum += w;
    theta_hat += w * theta[j];
  }
  theta_hat /= wsum;

  // back to the usual tail-shape sign: xi = mean log1p(-theta x)
  double k_hat = 0.0;
  for (double v : x) k_hat += std::log1p(-theta_hat * v);
  k_hat /= m_tail;
  const double sigma = -k_hat / theta_hat;
  if (!std::isfinite(k_hat) || !std::isfinite(sigma) || !(sigma > 0.0)) {
    return fit;
  }
  fit.k = k_hat;
  fit.sigma = sigma;
  fit.ok = true;
  return fit;
}

double gpd_quantile(double p, double k, double sigma) {
  if (std::abs(k) < 1e-12) return -sigma * std::log1p(-p);
  return sigma * std::expm1(-k * std::log1p(-p)) / k;
}

}  // namespace

MixtureParams plug_in_estimate(const DrawStore& store) {
  const Eigen::VectorXd totals = total_loglik_per_draw(store);
  Eigen::Index best = 0;
  totals.maxCoeff(&best);
  return store.draws[best];
}

MixtureParams posterior_mean_params(const DrawStore& store) {
  if (store.n_retained() < 1) {
    throw ValidationError("posterior mean: store holds no retained draws");
  }
  const DrawStore ordered = relabel_draws(store, RelabelRule::kByIntercept);
  MixtureParams mean = ordered.draws.front();
  const int C = mean.n_components();
  for (int c = 0; c < C; ++c) {
    mean.components[c].beta.setZero();
    mean.components[c].sigma2 = 0.0;
  }
  mean.weights.setZero();
  const double S = static_cast<double>(ordered.n_retained());
  for (const MixtureParams& draw : ordered.draws) {
    mean.weights += draw.weights / S;
    for (int c = 0; c < C; ++c) {
      mean.components[c].beta += draw.components[c].beta / S;
      mean.components[c].sigma2 += draw.components[c].sigma2 / S;
    }
  }
  return mean;
}

double aic(const DrawStore& store, const ObservationSet& data) {
  (void)data;
  const double loglik_hat = total_loglik_per_draw(store).maxCoeff();
  return 2.0 * parameter_count(store) - 2.0 * loglik_hat;
}

double bic(const DrawStore& store, const ObservationSet& data) {
  const double loglik_hat = total_loglik_per_draw(store).maxCoeff();
  return parameter_count(store) * std::log(static_cast<double>(data.n())) -
         2.0 * loglik_hat;
}

double dic(const DrawStore& store, const ObservationSet& data) {
  if (store.n_retained() < 2) {
    throw ValidationError("DIC: need at least two retained draws");
  }
  const double mean_dev = -2.0 * total_loglik_per_draw(store).mean();
  const double dev_at_mean =
      -2.0 * dataset_loglik(data, posterior_mean_params(store));
  return dic_value(mean_dev, dev_at_mean);
}

double waic(const DrawStore& store) {
  if (store.n_retained() < 2) {
    throw ValidationError("WAIC: need at least two retained draws");
  }
  const Eigen::Index n = store.pointwise.cols();
  const double S = static_cast<double>(store.n_retained());
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd ll = store.pointwise.col(i);
    const double lppd = log_mean_exp(ll);
    const double var = (ll.array() - ll.mean()).square().sum() / (S - 1.0);
    total += lppd - var;
  }
  return -2.0 * total;
}

double waic_penalty(const DrawStore& store) {
  if (store.n_retained() < 2) {
    throw ValidationError("WAIC: need at least two retained draws");
  }
  const double S = static_cast<double>(store.n_retained());
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < store.pointwise.cols(); ++i) {
    const Eigen::VectorXd ll = store.pointwise.col(i);
    penalty += (ll.array() - ll.mean()).square().sum() / (S - 1.0);
  }
  return penalty;
}

LooResult psis_loo(const DrawStore& store) {
  const int S = store.n_retained();
  if (S < 1) throw ValidationError("LOO: store holds no retained draws");
  const Eigen::Index n = store.pointwise.cols();

  LooResult result;
  result.pareto_k = Eigen::VectorXd::Zero(n);
  result.small_sample = S < 100;

  const int tail_len = static_cast<int>(
      std::ceil(std::min(0.2 * S, 3.0 * std::sqrt(static_cast<double>(S)))));

  std::vector<double> logw(S);
  std::vector<int> idx(S);
  double elpd_total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd ll = store.pointwise.col(i);
    // shifted log importance ratios, max at 0
    const double lr_max = -ll.minCoeff();
    for (int s = 0; s < S; ++s) logw[s] = -ll[s] - lr_max;

    bool smoothed = false;
    if (tail_len >= 5 && S - tail_len >= 1) {
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(),
                [&](int a, int b) { return logw[a] < logw[b]; });
      const double cutoff = std::exp(logw[idx[S - tail_len - 1]]);
      std::vector<double> exceed(tail_len);
      for (int j = 0; j < tail_len; ++j) {
        exceed[j] = std::exp(logw[idx[S - tail_len + j]]) - cutoff;
      }
      if (exceed.back() > 1e-13) {
        const GpdFit fit = fit_gpd(exceed);
        if (fit.ok) {
          const double k_reg =
              (tail_len * fit.k + 5.0) / (tail_len + 10.0);
          result.pareto_k[i] = k_reg;
          if (k_reg > kHighParetoK) {
            result.high_k.push_back(static_cast<int>(i));
          }
          for (int j = 0; j < tail_len; ++j) {
            const double p = (j + 0.5) / tail_len;
            const double q = cutoff + gpd_quantile(p, k_reg, fit.sigma);
            logw[idx[S - tail_len + j]] = std::log(std::min(q, 1.0));
          }
          smoothed = true;
        } else {
          result.fallbacks.push_back(static_cast<int>(i));
        }
      }
      // a flat tail needs no smoothing and is not a failure
    } else {
      result.fallbacks.push_back(static_cast<int>(i));
    }
    (void)smoothed;

    double num = -std::numeric_limits<double>::infinity();
    double den = num;
    for (int s = 0; s < S; ++s) {
      num = std::max(num, logw[s] + ll[s]);
      den = std::max(den, logw[s]);
    }
    double num_acc = 0.0, den_acc = 0.0;
    for (int s = 0; s < S; ++s) {
      num_acc += std::exp(logw[s] + ll[s] - num);
      den_acc += std::exp(logw[s] - den);
    }
    elpd_total += num + std::log(num_acc) - den - std::log(den_acc);
  }
  result.loo = -2.0 * elpd_total;
  return result;
}

FitReport fit_report(const DrawStore& store, const ObservationSet& data) {
  if (data.n() != store.pointwise.cols()) {
    throw ValidationError("fit report: data size differs from stored matrix");
  }
  FitReport report;
  report.k_params = parameter_count(store);
  report.aic = aic(store, data);
  report.bic = bic(store, data);

  const double mean_dev = -2.0 * total_loglik_per_draw(store).mean();
  const double dev_at_mean =
      -2.0 * dataset_loglik(data, posterior_mean_params(store));
  report.p_dic = mean_dev - dev_at_mean;
  report.dic = dic_value(mean_dev, dev_at_mean);
  report.negative_p_dic = report.p_dic < 0.0;

  report.p_waic = waic_penalty(store);
  report.waic = waic(store);

  LooResult loo = psis_loo(store);
  report.loo = loo.loo;
  report.pareto_k = std::move(loo.pareto_k);
  report.high_pareto_k = std::move(loo.high_k);
  report.loo_fallbacks = std::move(loo.fallbacks);
  report.small_sample = loo.small_sample;
  return report;
}

std::string fit_report_json(const FitReport& report) {
  nlohmann::json j;
  j["aic"] = report.aic;
  j["bic"] = report.bic;
  j["dic"] = report.dic;
  j["waic"] = report.waic;
  j["loo"] = report.loo;
  j["p_dic"] = report.p_dic;
  j["p_waic"] = report.p_waic;
  j["k_params"] = report.k_params;
  j["pareto_k"] = std::vector<double>(
      report.pareto_k.data(), report.pareto_k.data() + report.pareto_k.size());
  j["high_pareto_k"] = report.high_pareto_k;
  j["loo_fallbacks"] = report.loo_fallbacks;
  j["negative_p_dic"] = report.negative_p_dic;
  j["small_sample"] = report.small_sample;
  return j.dump(2);
}

std::size_t argmin_model(const std::vector<double>& values) {
  if (values.empty()) {
    throw ValidationError("model comparison: no criterion values given");
  }
  return static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
}

}  // namespace mixtobit
