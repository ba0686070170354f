#ifndef MIXTOBIT_DISTRIBUTIONS_HPP_
#define MIXTOBIT_DISTRIBUTIONS_HPP_

#include <Eigen/Dense>

#include "mixtobit/rng.hpp"

namespace mixtobit {

// Standard normal density and CDF. The log variants stay finite and
// accurate deep into the tails (|z| well past 35); the far lower tail of
// log_normal_cdf switches to an asymptotic Mills-ratio expansion.
double normal_pdf(double z);
double log_normal_pdf(double z);
double normal_cdf(double z);
double log_normal_cdf(double z);

// Inverse standard normal CDF (Wichura's AS 241, PPND16). Accurate to
// close to double precision over the full open interval, including
// extreme tail probabilities.
double normal_quantile(double p);

// Draw from N(mean, variance) restricted to (lower, upper). Either bound
// may be infinite. Inverse-CDF sampling for moderate truncation; when the
// whole region lies beyond 4 standard deviations from the mean, switches
// to exponential/uniform rejection so far-tail draws stay exact and cheap.
// The returned value is strictly inside (lower, upper).
double sample_truncated_normal(double mean, double variance, double lower,
                               double upper, RngStream& rng);

// Inverse-gamma IG(shape a, scale b): density (b^a/Gamma(a)) x^{-a-1}
// exp(-b/x). Mean b/(a-1) for a > 1.
double sample_inverse_gamma(double shape, double scale, RngStream& rng);

// Dirichlet draw; components nonnegative and summing to 1.
Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& concentrations,
                                 RngStream& rng);

// Categorical draw, returning a 0-based index with probability probs[i].
// probs must be nonnegative and sum to 1 within 1e-9 (renormalized
// internally). The cumulative walk follows the order of the given vector.
int sample_categorical(const Eigen::VectorXd& probs, RngStream& rng);

// Multivariate normal draw via Cholesky factorization of the covariance.
Eigen::VectorXd sample_mv_normal(const Eigen::VectorXd& mean,
                                 const Eigen::MatrixXd& covariance,
                                 RngStream& rng);

}  // namespace mixtobit

#endif  // MIXTOBIT_DISTRIBUTIONS_HPP_
