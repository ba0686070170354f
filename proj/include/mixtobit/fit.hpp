#ifndef MIXTOBIT_FIT_HPP_
#define MIXTOBIT_FIT_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixtobit/data.hpp"
#include "mixtobit/gibbs.hpp"
#include "mixtobit/model.hpp"

namespace mixtobit {

// Model-fit criteria computed from a chain's retained draws and their
// pointwise log-likelihood matrix. Everything is reported on the deviance
// scale (-2 log likelihood units), smaller is better.
struct FitReport {
  double aic = 0.0;
  double bic = 0.0;
  double dic = 0.0;
  double waic = 0.0;
  double loo = 0.0;
  double p_dic = 0.0;
  double p_waic = 0.0;
  int k_params = 0;  // (2 + p) * C - 1
  Eigen::VectorXd pareto_k;
  std::vector<int> high_pareto_k;  // observations with k above 0.7
  std::vector<int> loo_fallbacks;  // observations where the tail fit failed
  bool negative_p_dic = false;
  bool small_sample = false;  // fewer than 100 retained draws
};

// The retained draw with the largest total log likelihood. Used as the
// plug-in point for AIC/BIC; posterior means are unusable for that because
// of label switching.
MixtureParams plug_in_estimate(const DrawStore& store);

// Componentwise posterior mean after order-by-intercept relabeling.
MixtureParams posterior_mean_params(const DrawStore& store);

double aic(const DrawStore& store, const ObservationSet& data);
double bic(const DrawStore& store, const ObservationSet& data);

// DIC = mean deviance + p_D, p_D = mean deviance - deviance at the
// posterior mean (relabeled componentwise mean).
double dic(const DrawStore& store, const ObservationSet& data);
inline double dic_value(double mean_deviance, double deviance_at_mean) {
  return 2.0 * mean_deviance - deviance_at_mean;
}

// WAIC = -2 sum_i [lppd_i - Var_s(ll_is)], variance with divisor S-1.
double waic(const DrawStore& store);
double waic_penalty(const DrawStore& store);  // p_WAIC

struct LooResult {
  double loo = 0.0;
  Eigen::VectorXd pareto_k;
  std::vector<int> high_k;
  std::vector<int> fallbacks;
  bool small_sample = false;
};

// PSIS leave-one-out: importance ratios exp(-ll_is) with the largest
// ceil(min(0.2 S, 3 sqrt(S))) ratios per observation replaced by expected
// order statistics of a fitted generalized Pareto tail (capped at the raw
// maximum). Tail-fit failures fall back to raw importance sampling and are
// flagged, as are observations with k above 0.7.
LooResult psis_loo(const DrawStore& store);

FitReport fit_report(const DrawStore& store, const ObservationSet& data);

std::string fit_report_json(const FitReport& report);

// Position of the smallest criterion value; ties go to the earliest model.
std::size_t argmin_model(const std::vector<double>& values);

}  // namespace mixtobit

#endif  // MIXTOBIT_FIT_HPP_
