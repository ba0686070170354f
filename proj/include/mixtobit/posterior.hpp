#ifndef MIXTOBIT_POSTERIOR_HPP_
#define MIXTOBIT_POSTERIOR_HPP_

#include <vector>

#include <Eigen/Dense>

#include "mixtobit/data.hpp"
#include "mixtobit/gibbs.hpp"
#include "mixtobit/model.hpp"

namespace mixtobit {

// Pointwise summary of replicate density estimates over a common grid.
// The quantile curves use the nearest-rank convention, so with 200
// replicates the 5th percentile is the 10th order statistic.
struct DensityBand {
  Eigen::VectorXd grid;
  Eigen::VectorXd mean_curve;
  Eigen::VectorXd q05_curve;
  Eigen::VectorXd q95_curve;
};

// Pr(Y = lower | x) = sum_c pi_c Phi((lower - x'beta_c)/sigma_c); zero when
// the bound is -infinity. prob_at_upper and prob_interior complete the mass
// identity: the three sum to one.
double prob_at_lower(const Eigen::VectorXd& x, const MixtureParams& params,
                     double lower);
double prob_at_upper(const Eigen::VectorXd& x, const MixtureParams& params,
                     double upper);
double prob_interior(const Eigen::VectorXd& x, const MixtureParams& params,
                     double lower, double upper);

// E[Y | x] for the two-sided censored mixture, from the censored-normal
// moments of each component. Infinite bounds drop their point-mass terms.
double expected_outcome(const Eigen::VectorXd& x, const MixtureParams& params,
                        double lower, double upper);

// E[Y | x, lower < Y < upper]. Throws EvaluationError when the interior
// probability is below 1e-12.
double expected_outcome_interior(const Eigen::VectorXd& x,
                                 const MixtureParams& params, double lower,
                                 double upper);

enum class Treatment { kContinuous, kBinary };

// One average marginal effect per retained draw. Continuous covariates use
// the analytic derivative sum_c pi_c beta_jc (Phi(b_ic) - Phi(a_ic));
// binary ones the discrete contrast of expected_outcome at x_j = 1 vs 0.
Eigen::VectorXd average_marginal_effect(const DrawStore& store,
                                        const ObservationSet& data,
                                        Eigen::Index covariate,
                                        Treatment treatment);

// Continuous censored density at covariates x0, averaged over the retained
// draws, evaluated on the grid.
Eigen::VectorXd mean_continuous_density(const DrawStore& store,
                                        const Eigen::VectorXd& x0,
                                        const Eigen::VectorXd& grid,
                                        double lower, double upper);

// Evaluation grid of cell midpoints strictly inside [lower, upper].
Eigen::VectorXd midpoint_grid(double lower, double upper, int points);

// Pointwise mean and nearest-rank 5th/95th percentiles across at least two
// replicate curves, each aligned to the grid.
DensityBand density_band(const std::vector<Eigen::VectorXd>& curves,
                         const Eigen::VectorXd& grid);
DensityBand density_band(const std::vector<DrawStore>& stores,
                         const Eigen::VectorXd& x0, const Eigen::VectorXd& grid,
                         double lower, double upper);

}  // namespace mixtobit

#endif  // MIXTOBIT_POSTERIOR_HPP_
