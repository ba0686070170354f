#ifndef MIXTOBIT_GIBBS_HPP_
#define MIXTOBIT_GIBBS_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mixtobit/data.hpp"
#include "mixtobit/model.hpp"
#include "mixtobit/rng.hpp"

namespace mixtobit {

// Prior family: pi ~ Dirichlet(alpha), beta_c ~ N(mu_c, omega_c^{-1}),
// sigma_c^2 ~ IG(ig_shape_c, ig_scale_c). omega is a precision matrix;
// the zero matrix is the flat improper limit, as is ig_shape = ig_scale = 0.
struct Hyperpriors {
  Eigen::VectorXd alpha;
  std::vector<Eigen::VectorXd> mu;
  std::vector<Eigen::MatrixXd> omega;
  Eigen::VectorXd ig_shape;
  Eigen::VectorXd ig_scale;

  static Hyperpriors symmetric(int n_components, Eigen::Index p,
                               double alpha_c, double omega_tau,
                               double ig_shape_c, double ig_scale_c);

  // alpha_c = 1/C, mu = 0, precision 10*I, flat variance prior.
  static Hyperpriors simulation_defaults(int n_components, Eigen::Index p);

  void validate(int n_components, Eigen::Index p) const;
};

struct GibbsState {
  MixtureParams params;
  Eigen::VectorXi labels;
  Eigen::VectorXd augmented;
};

// Sizes, label range, parameter validity, and the augmentation contract:
// augmented equals y exactly for interior rows, sits strictly below the
// lower bound for left-censored rows, strictly above the upper bound for
// right-censored rows.
void validate_state(const GibbsState& state, const ObservationSet& data);

enum class InitScheme {
  kDefault,            // beta = 0, sigma2 = 1, weights from alpha
  kLeastSquaresPerturb // interior least squares scaled by U(0.8, 1.2)
};

struct ChainSettings {
  int n_components = 1;
  int n_draws = 2000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  InitScheme init = InitScheme::kDefault;

  int retained() const { return (n_draws - burn_in) / thin; }
  void validate() const;
};

struct CollapseNote {
  int component = 0;  // 0-based
  int iteration = 0;  // 1-based sweep at which the streak reached 500
};

struct DrawStore {
  std::vector<MixtureParams> draws;
  Eigen::MatrixXd pointwise;  // retained x n, log likelihood per observation
  ChainSettings settings;
  std::uint64_t seed = 0;
  std::vector<CollapseNote> collapse_notes;

  int n_retained() const { return static_cast<int>(draws.size()); }
  Eigen::Index n_obs() const { return pointwise.cols(); }
};

// Order in which per-class draws consume the stream: classes with members
// first, sorted by their first member's row; empty classes last, sorted by
// current parameter values. Content-determined so that relabeling the
// components leaves the consumed random sequence aligned.
std::vector<int> class_processing_order(const Eigen::VectorXi& labels,
                                        const MixtureParams& params);

// Starting state: labels i.i.d. from the normalized alpha (or uniform
// weights under the least-squares scheme), then one augmentation pass.
GibbsState init_state(const ObservationSet& data, const ChainSettings& settings,
                      const Hyperpriors& hyper, RngStream& rng);

// Censored rows resampled from the truncated normal of their current
// class; interior rows are left untouched.
void draw_missing_outcomes(GibbsState& state, const ObservationSet& data,
                           RngStream& rng);

// Per class: sigma2 from IG(a + n_c/2, b + SSR/2) given the previous beta,
// then beta from the conjugate normal given the fresh sigma2. Empty classes
// with proper priors draw from the prior; improper cases abort.
void draw_component_params(GibbsState& state, const ObservationSet& data,
                           const Hyperpriors& hyper, RngStream& rng);

// Labels from the categorical with log-space probabilities proportional to
// pi_c phi((augmented_i - x_i'beta_c)/sigma_c)/sigma_c. Returns class
// counts. Skipped entirely when C = 1 (no randomness consumed).
Eigen::VectorXi draw_class_labels(GibbsState& state, const ObservationSet& data,
                                  RngStream& rng);

// Dirichlet(alpha_1 + n_1, ..., alpha_C + n_C). The optional order controls
// which class's gamma variate is drawn first (defaults to index order).
Eigen::VectorXd draw_mixture_weights(const Eigen::VectorXi& class_counts,
                                     const Hyperpriors& hyper, RngStream& rng,
                                     const std::vector<int>& order = {});

// Full chain: sweeps of missing outcomes -> component params -> labels ->
// weights, keeping every thin-th draw after burn_in together with the
// pointwise log likelihood of the original censored data. Step errors are
// rethrown with the sweep number. A component whose weight stays below
// 1/(10n) for 500 consecutive sweeps gets a collapse note.
DrawStore run_chain(const ObservationSet& data, const Hyperpriors& hyper,
                    const ChainSettings& settings, RngStream& rng);

// Same, starting from a caller-supplied state.
DrawStore run_chain_from(GibbsState state, const ObservationSet& data,
                         const Hyperpriors& hyper, const ChainSettings& settings,
                         RngStream& rng);

enum class RelabelRule { kNone, kByIntercept, kByWeight };

// Components of every retained draw permuted into ascending order of the
// rule's key (first coefficient or weight), ties kept in original order.
// Pointwise log likelihoods are label-symmetric and stay as stored.
DrawStore relabel_draws(const DrawStore& store, RelabelRule rule);

}  // namespace mixtobit

#endif  // MIXTOBIT_GIBBS_HPP_
