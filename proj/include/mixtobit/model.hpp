#ifndef MIXTOBIT_MODEL_HPP_
#define MIXTOBIT_MODEL_HPP_

#include <vector>

#include <Eigen/Dense>

#include "mixtobit/data.hpp"

namespace mixtobit {

struct ComponentParams {
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
};

struct MixtureParams {
  std::vector<ComponentParams> components;
  Eigen::VectorXd weights;

  int n_components() const { return static_cast<int>(components.size()); }
  Eigen::Index p() const {
    return components.empty() ? 0 : components.front().beta.size();
  }

  // Throws ValidationError unless: C >= 1, all betas share one length
  // (matching expected_p when nonnegative), every sigma2 > 0, weights
  // strictly positive and summing to 1 within 1e-10.
  void validate(Eigen::Index expected_p = -1) const;
};

// Components and weights reordered so that position j holds old component
// perm[j]. perm must be a permutation of 0..C-1.
MixtureParams permute_components(const MixtureParams& params,
                                 const std::vector<int>& perm);

// Log likelihood of observation i under one component: log Phi((l - x'b)/s)
// when y sits at the lower bound, log phi((y - x'b)/s) - log s when
// interior, log Phi((x'b - u)/s) at the upper bound.
double component_loglik_obs(Eigen::Index obs_index, const ObservationSet& data,
                            const ComponentParams& comp);

// Log of sum_c pi_c exp(component_loglik), combined with a max shift so a
// far-off component cannot underflow the total. Throws EvaluationError
// naming the observation when every component is at -infinity.
double mixture_loglik_obs(Eigen::Index obs_index, const ObservationSet& data,
                          const MixtureParams& params);

double mixture_lik_obs(Eigen::Index obs_index, const ObservationSet& data,
                       const MixtureParams& params);

// Per-observation log mixture likelihoods; dataset_loglik is their sum.
Eigen::VectorXd pointwise_loglik(const ObservationSet& data,
                                 const MixtureParams& params);
double dataset_loglik(const ObservationSet& data, const MixtureParams& params);

// Density implied for the observed (censored) outcome at covariates x:
// a continuous part on (lower, upper) plus point masses at finite bounds.
struct CensoredDensity {
  double continuous = 0.0;
  double mass_at_lower = 0.0;
  double mass_at_upper = 0.0;
};

CensoredDensity censored_density(double value, const Eigen::VectorXd& x,
                                 double lower, double upper,
                                 const MixtureParams& params);

}  // namespace mixtobit

#endif  // MIXTOBIT_MODEL_HPP_
