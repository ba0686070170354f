#include "mixtobit/posterior.hpp"

#include <algorithm>
#include <cmath>

#include "mixtobit/distributions.hpp"
#include "mixtobit/errors.hpp"

namespace mixtobit {

namespace {

constexpr double kMinInteriorProb = 1e-12;

void check_bounds(double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
    throw ValidationError("posterior summary: bounds must satisfy lower < upper");
  }
}

double mass_below(const Eigen::VectorXd& x, const MixtureParams& params,
                  double lower) {
  if (std::isinf(lower) && lower < 0.0) return 0.0;
  double total = 0.0;
  for (int c = 0; c < params.n_components(); ++c) {
    const ComponentParams& comp = params.components[c];
    const double m = x.dot(comp.beta);
    total += params.weights[c] * normal_cdf((lower - m) / std::sqrt(comp.sigma2));
  }
  return total;
}

double mass_above(const Eigen::VectorXd& x, const MixtureParams& params,
                  double upper) {
  if (std::isinf(upper) && upper > 0.0) return 0.0;
  double total = 0.0;
  for (int c = 0; c < params.n_components(); ++c) {
    const ComponentParams& comp = params.components[c];
    const double m = x.dot(comp.beta);
    total += params.weights[c] * normal_cdf((m - upper) / std::sqrt(comp.sigma2));
  }
  return total;
}

// interior slice of the censored mean and its probability, per component
struct InteriorPart {
  double mean_term = 0.0;
  double prob = 0.0;
};

InteriorPart interior_part(double m, double sigma, double lower, double upper) {
  const double a = (lower - m) / sigma;
  const double b = (upper - m) / sigma;
  const double cdf_a = std::isfinite(lower) ? normal_cdf(a) : 0.0;
  const double cdf_b = std::isfinite(upper) ? normal_cdf(b) : 1.0;
  const double pdf_a = std::isfinite(lower) ? normal_pdf(a) : 0.0;
  const double pdf_b = std::isfinite(upper) ? normal_pdf(b) : 0.0;
  InteriorPart part;
  part.prob = cdf_b - cdf_a;
  part.mean_term = m * part.prob + sigma * (pdf_a - pdf_b);
  return part;
}

double expected_outcome_unchecked(const Eigen::VectorXd& x,
                                  const MixtureParams& params, double lower,
                                  double upper) {
  double total = 0.0;
  for (int c = 0; c < params.n_components(); ++c) {
    const ComponentParams& comp = params.components[c];
    const double m = x.dot(comp.beta);
    const double sigma = std::sqrt(comp.sigma2);
    const InteriorPart part = interior_part(m, sigma, lower, upper);
    double value = part.mean_term;
    if (std::isfinite(lower)) {
      value += lower * normal_cdf((lower - m) / sigma);
    }
    if (std::isfinite(upper)) {
      value += upper * normal_cdf((m - upper) / sigma);
    }
    total += params.weights[c] * value;
  }
  return total;
}

}  // namespace

double prob_at_lower(const Eigen::VectorXd& x, const MixtureParams& params,
                     double lower) {
  params.validate(x.size());
  if (std::isnan(lower)) {
    throw ValidationError("prob_at_lower: bound is NaN");
  }
  return mass_below(x, params, lower);
}

double prob_at_upper(const Eigen::VectorXd& x, const MixtureParams& params,
                     double upper) {
  params.validate(x.size());
  if (std::isnan(upper)) {
    throw ValidationError("prob_at_upper: bound is NaN");
  }
  return mass_above(x, params, upper);
}

double prob_interior(const Eigen::VectorXd& x, const MixtureParams& params,
                     double lower, double upper) {
  params.validate(x.size());
  check_bounds(lower, upper);
  double total = 0.0;
  for (int c = 0; c < params.n_components(); ++c) {
    const ComponentParams& comp = params.components[c];
    total += params.weights[c] *
             interior_part(x.dot(comp.beta), std::sqrt(comp.sigma2), lower,
                           upper)
                 .prob;
  }
  return total;
}

double expected_outcome(const Eigen::VectorXd& x, const MixtureParams& params,
                        double lower, double upper) {
  params.validate(x.size());
  check_bounds(lower, upper);
  return expected_outcome_unchecked(x, params, lower, upper);
}

double expected_outcome_interior(const Eigen::VectorXd& x,
                                 const MixtureParams& params, double lower,
                                 double upper) {
  params.validate(x.size());
  check_bounds(lower, upper);
  double mean_term = 0.0;
  double prob = 0.0;
  for (int c = 0; c < params.n_components(); ++c) {
    const ComponentParams& comp = params.components[c];
    const InteriorPart part = interior_part(
        x.dot(comp.beta), std::sqrt(comp.sigma2), lower, upper);
    mean_term += params.weights[c] * part.mean_term;
    prob += params.weights[c] * part.prob;
  }
  if (prob < kMinInteriorProb) {
    throw EvaluationError(
        "expected_outcome_interior: interior probability vanishes");
  }
  return mean_term / prob;
}

Eigen::VectorXd average_marginal_effect(const DrawStore& store,
                                        const ObservationSet& data,
                                        Eigen::Index covariate,
                                        Treatment treatment) {
  data.validate();
  if (store.n_retained() < 1) {
    throw ValidationError("marginal effects: store holds no retained draws");
  }
  if (covariate < 0 || covariate >= data.p()) {
    throw ValidationError("marginal effects: covariate index out of range");
  }
  const Eigen::Index n = data.n();
  const int S = store.n_retained();
  Eigen::VectorXd ame(S);
  Eigen::VectorXd x_on, x_off;
  for (int s = 0; s < S; ++s) {
    const MixtureParams& params = store.draws[s];
    params.validate(data.p());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (treatment == Treatment::kContinuous) {
        for (int c = 0; c < params.n_components(); ++c) {
          const ComponentParams& comp = params.components[c];
          const double m = data.X.row(i).dot(comp.beta);
          const double sigma = std::sqrt(comp.sigma2);
          const double cdf_a = normal_cdf((data.lower[i] - m) / sigma);
          const double cdf_b = normal_cdf((data.upper[i] - m) / sigma);
          acc += params.weights[c] * comp.beta[covariate] * (cdf_b - cdf_a);
        }
      } else {
        x_on = data.X.row(i);
        x_off = x_on;
        x_on[covariate] = 1.0;
        x_off[covariate] = 0.0;
        acc += expected_outcome_unchecked(x_on, params, data.lower[i],
                                          data.upper[i]) -
               expected_outcome_unchecked(x_off, params, data.lower[i],
                                          data.upper[i]);
      }
    }
    ame[s] = acc / static_cast<double>(n);
  }
  return ame;
}

Eigen::VectorXd mean_continuous_density(const DrawStore& store,
                                        const Eigen::VectorXd& x0,
                                        const Eigen::VectorXd& grid,
                                        double lower, double upper) {
  if (store.n_retained() < 1) {
    throw ValidationError("density curve: store holds no retained draws");
  }
  check_bounds(lower, upper);
  const double S = static_cast<double>(store.n_retained());
  Eigen::VectorXd curve = Eigen::VectorXd::Zero(grid.size());
  for (const MixtureParams& draw : store.draws) {
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
      curve[g] += censored_density(grid[g], x0, lower, upper, draw).continuous;
    }
  }
  return curve / S;
}

Eigen::VectorXd midpoint_grid(double lower, double upper, int points) {
  if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw ValidationError("grid needs finite bounds with lower < upper");
  }
  if (points < 1) {
    throw ValidationError("grid needs at least one point");
  }
  const double h = (upper - lower) / points;
  Eigen::VectorXd grid(points);
  for (int g = 0; g < points; ++g) {
    grid[g] = lower + (g + 0.5) * h;
  }
  return grid;
}

DensityBand density_band(const std::vector<Eigen::VectorXd>& curves,
                         const Eigen::VectorXd& grid) {
  const int R = static_cast<int>(curves.size());
  if (R < 2) {
    throw ValidationError("density band: need at least two replicate curves");
  }
  for (const Eigen::VectorXd& curve : curves) {
    if (curve.size() != grid.size()) {
      throw ValidationError("density band: curve length differs from grid");
    }
    if (!curve.allFinite() || curve.minCoeff() < 0.0) {
      throw ValidationError("density band: curves must be finite and nonnegative");
    }
  }

  DensityBand band;
  band.grid = grid;
  band.mean_curve = Eigen::VectorXd::Zero(grid.size());
  band.q05_curve.resize(grid.size());
  band.q95_curve.resize(grid.size());

  const int rank05 = static_cast<int>(std::ceil(0.05 * R));
  const int rank95 = static_cast<int>(std::ceil(0.95 * R));
  std::vector<double> column(curves.size());
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    for (int r = 0; r < R; ++r) {
      column[r] = curves[r][g];
      band.mean_curve[g] += curves[r][g] / R;
    }
    std::nth_element(column.begin(), column.begin() + (rank05 - 1),
                     column.end());
    band.q05_curve[g] = column[rank05 - 1];
    std::nth_element(column.begin(), column.begin() + (rank95 - 1),
                     column.end());
    band.q95_curve[g] = column[rank95 - 1];
  }
  return band;
}

DensityBand density_band(const std::vector<DrawStore>& stores,
                         const Eigen::VectorXd& x0, const Eigen::VectorXd& grid,
                         double lower, double upper) {
  std::vector<Eigen::VectorXd> curves;
  curves.reserve(stores.size());
  for (const DrawStore& store : stores) {
    curves.push_back(mean_continuous_density(store, x0, grid, lower, upper));
  }
  return density_band(curves, grid);
}

}  // namespace mixtobit
