#ifndef MIXTOBIT_SIMULATE_HPP_
#define MIXTOBIT_SIMULATE_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mixtobit/data.hpp"
#include "mixtobit/gibbs.hpp"
#include "mixtobit/model.hpp"
#include "mixtobit/posterior.hpp"
#include "mixtobit/rng.hpp"

namespace mixtobit {

// A three-class censored-normal generating process: latent
// y* = b0_c + b1_c x + sigma_c z with x ~ N(0, covariate_variance),
// observed y = min(max(lower, y*), upper).
struct DgpSpec {
  Eigen::VectorXd intercepts;
  Eigen::VectorXd slopes;
  Eigen::VectorXd sigmas;  // standard deviations
  Eigen::VectorXd weights;
  double covariate_variance = 4.0;
  double lower = 0.0;
  double upper = 7.5;
  int n = 2000;

  int n_classes() const { return static_cast<int>(intercepts.size()); }
  void validate() const;

  // the generating parameters as a mixture (sigmas squared into variances)
  MixtureParams params() const;
};

// The four built-in processes share slopes (-0.1, 0.2, -0.4), sigmas
// (0.25, 0.2, 1), weights (0.25, 0.35, 0.4), covariate variance 4 and
// bounds [0, 7.5]; only the intercepts move. Desk-scale default n = 2000.
DgpSpec builtin_dgp(int id);

// Per observation: class, then covariate, then latent noise. When classes
// is non-null it receives the drawn class of each row.
ObservationSet generate(const DgpSpec& spec, RngStream& rng,
                        Eigen::VectorXi* classes = nullptr);

struct RecoveryRow {
  int replicate = 0;
  MixtureParams estimate;  // posterior mean, components ordered by intercept
};

struct StudyCell {
  int dgp_id = 0;
  int n_components = 0;
  DensityBand band;
  std::vector<RecoveryRow> recovery;
  int failures = 0;
};

// Replication harness: for every (dgp, C) cell, generate `replicates` data
// sets of n_obs rows and fit each with the standard simulation hyperpriors,
// collecting the posterior-mean density at x = 0 into a band plus a
// parameter-recovery row per replicate. Data sets depend on the dgp and
// replicate index only, so every C sees the same data. Replicates run on
// up to `parallelism` threads; results are identical regardless of the
// thread count. Chains that fail numerically are skipped and counted; a
// cell with fewer than two surviving replicates throws NumericalError.
std::vector<StudyCell> replicate_study(const std::vector<int>& dgp_ids,
                                       const std::vector<int>& component_counts,
                                       int replicates, int n_obs,
                                       const ChainSettings& settings,
                                       int parallelism);

}  // namespace mixtobit

#endif  // MIXTOBIT_SIMULATE_HPP_
