#include "mixtobit/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "mixtobit/distributions.hpp"
#include "mixtobit/errors.hpp"
#include "mixtobit/fit.hpp"

namespace mixtobit {

namespace {

constexpr int kGridPoints = 151;

}  // namespace

void DgpSpec::validate() const {
  const Eigen::Index k = intercepts.size();
  if (k < 1 || slopes.size() != k || sigmas.size() != k ||
      weights.size() != k) {
    throw ValidationError(
        "dgp spec: intercepts, slopes, sigmas and weights must share a "
        "positive length");
  }
  if (!intercepts.allFinite() || !slopes.allFinite()) {
    throw ValidationError("dgp spec: coefficients must be finite");
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (!(sigmas[c] > 0.0) || !std::isfinite(sigmas[c])) {
      throw ValidationError("dgp spec: sigmas must be positive and finite");
    }
    if (!(weights[c] > 0.0)) {
      throw ValidationError("dgp spec: weights must be positive");
    }
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9) {
    throw ValidationError("dgp spec: weights must sum to 1");
  }
  if (!(covariate_variance > 0.0) || !std::isfinite(covariate_variance)) {
    throw ValidationError("dgp spec: covariate variance must be positive");
  }
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
    throw ValidationError("dgp spec: bounds must satisfy lower < upper");
  }
  if (n < 1) {
    throw ValidationError("dgp spec: n must be positive");
  }
}

MixtureParams DgpSpec::params() const {
  validate();
  MixtureParams out;
  out.weights = weights;
  for (int c = 0; c < n_classes(); ++c) {
    Eigen::VectorXd b(2);
    b << intercepts[c], slopes[c];
    out.components.push_back({b, sigmas[c] * sigmas[c]});
  }
  return out;
}

DgpSpec builtin_dgp(int id) {
  DgpSpec spec;
  spec.slopes.resize(3);
  spec.slopes << -0.1, 0.2, -0.4;
  spec.sigmas.resize(3);
  spec.sigmas << 0.25, 0.2, 1.0;
  spec.weights.resize(3);
  spec.weights << 0.25, 0.35, 0.4;
  spec.intercepts.resize(3);
  switch (id) {
    case 1:
      spec.intercepts << 0.75, 2.5, 4.0;
      break;
    case 2:
      spec.intercepts << 1.95, 2.5, 2.5;
      break;
    case 3:
      spec.intercepts << 0.25, 2.5, 6.5;
      break;
    case 4:
      spec.intercepts << 0.25, 0.5, 1.5;
      break;
    default:
      throw ValidationError("builtin dgp id must be 1, 2, 3 or 4");
  }
  return spec;
}

ObservationSet generate(const DgpSpec& spec, RngStream& rng,
                        Eigen::VectorXi* classes) {
  spec.validate();
  const double sd_x = std::sqrt(spec.covariate_variance);
  ObservationSet data;
  data.y.resize(spec.n);
  data.X.resize(spec.n, 2);
  data.lower = Eigen::VectorXd::Constant(spec.n, spec.lower);
  data.upper = Eigen::VectorXd::Constant(spec.n, spec.upper);
  if (classes != nullptr) classes->resize(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const int c = sample_categorical(spec.weights, rng);
    if (classes != nullptr) (*classes)[i] = c;
    const double x = sd_x * rng.normal();
    const double latent =
        spec.intercepts[c] + spec.slopes[c] * x + spec.sigmas[c] * rng.normal();
    data.X(i, 0) = 1.0;
    data.X(i, 1) = x;
    data.y[i] = std::min(std::max(spec.lower, latent), spec.upper);
  }
  data.validate();
  return data;
}

std::vector<StudyCell> replicate_study(const std::vector<int>& dgp_ids,
                                       const std::vector<int>& component_counts,
                                       int replicates, int n_obs,
                                       const ChainSettings& settings,
                                       int parallelism) {
  if (dgp_ids.empty() || component_counts.empty()) {
    throw ValidationError("replicate study: no cells requested");
  }
  if (replicates < 2) {
    throw ValidationError("replicate study: need at least two replicates");
  }
  if (n_obs < 10) {
    throw ValidationError("replicate study: need at least ten observations");
  }
  if (parallelism < 1) {
    throw ValidationError("replicate study: parallelism must be positive");
  }
  for (int c : component_counts) {
    ChainSettings cell_settings = settings;
    cell_settings.n_components = c;
    cell_settings.validate();
  }

  RngStream master(settings.seed);
  std::vector<StudyCell> cells;
  for (int dgp_id : dgp_ids) {
    DgpSpec spec = builtin_dgp(dgp_id);
    spec.n = n_obs;
    RngStream dgp_root = master.substream(static_cast<std::uint64_t>(dgp_id));
    RngStream data_root = dgp_root.substream(0);

    for (int n_components : component_counts) {
      ChainSettings cell_settings = settings;
      cell_settings.n_components = n_components;
      const Hyperpriors hyper =
          Hyperpriors::simulation_defaults(n_components, 2);
      RngStream fit_root =
          dgp_root.substream(static_cast<std::uint64_t>(n_components));

      std::vector<std::optional<Eigen::VectorXd>> curves(replicates);
      std::vector<std::optional<RecoveryRow>> rows(replicates);
      const Eigen::VectorXd grid =
          midpoint_grid(spec.lower, spec.upper, kGridPoints);
      Eigen::VectorXd x0(2);
      x0 << 1.0, 0.0;

      std::atomic<int> next{0};
      std::exception_ptr hard_failure;
      std::mutex hard_failure_guard;
      auto worker = [&] {
        for (int r = next.fetch_add(1); r < replicates;
             r = next.fetch_add(1)) {
          try {
            RngStream data_rng =
                data_root.substream(static_cast<std::uint64_t>(r));
            const ObservationSet data = generate(spec, data_rng);
            RngStream chain_rng =
                fit_root.substream(static_cast<std::uint64_t>(r));
            const DrawStore store =
                run_chain(data, hyper, cell_settings, chain_rng);
            curves[r] = mean_continuous_density(store, x0, grid, spec.lower,
                                                spec.upper);
            rows[r] = RecoveryRow{r, posterior_mean_params(store)};
          } catch (const NumericalError&) {
            // counted below; the replicate is skipped
          } catch (...) {
            const std::lock_guard<std::mutex> lock(hard_failure_guard);
            if (!hard_failure) hard_failure = std::current_exception();
            return;
          }
        }
      };

      const int n_threads = std::max(1, std::min(parallelism, replicates));
      std::vector<std::thread> pool;
      pool.reserve(n_threads);
      for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (std::thread& t : pool) t.join();
      if (hard_failure) std::rethrow_exception(hard_failure);

      StudyCell cell;
      cell.dgp_id = dgp_id;
      cell.n_components = n_components;
      std::vector<Eigen::VectorXd> kept;
      for (int r = 0; r < replicates; ++r) {
        if (!curves[r].has_value()) {
          ++cell.failures;
          continue;
        }
        kept.push_back(std::move(*curves[r]));
        cell.recovery.push_back(std::move(*rows[r]));
      }
      if (static_cast<int>(kept.size()) < 2) {
        throw NumericalError(
            "replicate study: fewer than two replicates survived for dgp " +
            std::to_string(dgp_id) + " with " + std::to_string(n_components) +
            " components");
      }
      cell.band = density_band(kept, grid);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace mixtobit
