#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "mixtobit/distributions.hpp"
#include "mixtobit/errors.hpp"
#include "mixtobit/gibbs.hpp"
#include "mixtobit/model.hpp"
#include "mixtobit/posterior.hpp"
#include "mixtobit/rng.hpp"

using namespace mixtobit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MixtureParams demo_mixture() {
  MixtureParams params;
  Eigen::VectorXd b(2);
  b << 0.75, -0.1;
  params.components.push_back({b, 0.25 * 0.25});
  b << 2.5, 0.2;
  params.components.push_back({b, 0.2 * 0.2});
  b << 4.0, -0.4;
  params.components.push_back({b, 1.0});
  params.weights.resize(3);
  params.weights << 0.25, 0.35, 0.4;
  return params;
}

ObservationSet draw_demo_data(int n, const MixtureParams& params,
                              RngStream& rng, double lower = 0.0,
                              double upper = 7.5) {
  ObservationSet data;
  data.y.resize(n);
  data.X.resize(n, 2);
  data.lower = Eigen::VectorXd::Constant(n, lower);
  data.upper = Eigen::VectorXd::Constant(n, upper);
  for (int i = 0; i < n; ++i) {
    const double x = 2.0 * rng.normal();
    data.X(i, 0) = 1.0;
    data.X(i, 1) = x;
    const int c = sample_categorical(params.weights, rng);
    const ComponentParams& comp = params.components[c];
    const double latent = comp.beta[0] + comp.beta[1] * x +
                          std::sqrt(comp.sigma2) * rng.normal();
    data.y[i] = std::min(std::max(lower, latent), upper);
  }
  return data;
}

MixtureParams single_component(double b0, double b1, double sigma2) {
  MixtureParams params;
  Eigen::VectorXd b(2);
  b << b0, b1;
  params.components.push_back({b, sigma2});
  params.weights = Eigen::VectorXd::Ones(1);
  return params;
}

MixtureParams random_mixture(int n_components, RngStream& rng) {
  MixtureParams params;
  double total = 0.0;
  params.weights.resize(n_components);
  for (int c = 0; c < n_components; ++c) {
    Eigen::VectorXd b(2);
    b << 4.0 * rng.uniform() - 2.0, 2.0 * rng.uniform() - 1.0;
    const double sigma2 = 0.04 + 2.0 * rng.uniform();
    params.components.push_back({b, sigma2});
    params.weights[c] = 0.1 + rng.uniform();
    total += params.weights[c];
  }
  params.weights /= total;
  return params;
}

// E[y] by trapezoid quadrature of the censored density, point masses added
double quadrature_mean(const Eigen::VectorXd& x, const MixtureParams& params,
                       double lower, double upper, int n_points) {
  const double lo = lower + 1e-9;
  const double hi = upper - 1e-9;
  const double h = (hi - lo) / (n_points - 1);
  double integral = 0.0;
  for (int k = 0; k < n_points; ++k) {
    const double v = lo + k * h;
    const double f = censored_density(v, x, lower, upper, params).continuous;
    integral += (k == 0 || k == n_points - 1) ? 0.5 * v * f : v * f;
  }
  integral *= h;
  const CensoredDensity at_lo = censored_density(lower + 1e-12, x, lower,
                                                 upper, params);
  return integral + lower * at_lo.mass_at_lower + upper * at_lo.mass_at_upper;
}

struct InteriorQuadrature {
  double mean = 0.0;
  double prob = 0.0;
};

InteriorQuadrature quadrature_interior(const Eigen::VectorXd& x,
                                       const MixtureParams& params,
                                       double lower, double upper,
                                       int n_points) {
  const double lo = lower + 1e-9;
  const double hi = upper - 1e-9;
  const double h = (hi - lo) / (n_points - 1);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < n_points; ++k) {
    const double v = lo + k * h;
    const double f = censored_density(v, x, lower, upper, params).continuous;
    const double w = (k == 0 || k == n_points - 1) ? 0.5 : 1.0;
    num += w * v * f;
    den += w * f;
  }
  return {num / den, den * h};
}

}  // namespace

TEST_CASE("censoring probability at the lower bound") {
  const MixtureParams centered = single_component(1.3, 0.0, 4.0);
  Eigen::VectorXd x(2);
  x << 1.0, 0.7;
  CHECK(prob_at_lower(x, centered, 1.3) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(prob_at_lower(x, centered, -kInf) == 0.0);

  // component masses 0.2 and 0.4 mix to 0.34 under weights 0.3 / 0.7
  MixtureParams two;
  Eigen::VectorXd b(2);
  b << -normal_quantile(0.2), 0.0;
  two.components.push_back({b, 1.0});
  b << -normal_quantile(0.4), 0.0;
  two.components.push_back({b, 1.0});
  two.weights.resize(2);
  two.weights << 0.3, 0.7;
  CHECK(prob_at_lower(x, two, 0.0) == doctest::Approx(0.34).epsilon(1e-12));

  CHECK_THROWS_AS(prob_at_lower(x, two, std::nan("")), ValidationError);
  Eigen::VectorXd short_x(1);
  short_x << 1.0;
  CHECK_THROWS_AS(prob_at_lower(short_x, two, 0.0), ValidationError);
}

TEST_CASE("censoring masses and the interior share sum to one") {
  RngStream rng(401);
  for (int rep = 0; rep < 50; ++rep) {
    const MixtureParams params = random_mixture(1 + rep % 3, rng);
    Eigen::VectorXd x(2);
    x << 1.0, 2.0 * rng.normal();
    const double lower = -0.5 + rng.uniform();
    const double upper = lower + 0.5 + 3.0 * rng.uniform();
    const double total = prob_at_lower(x, params, lower) +
                         prob_interior(x, params, lower, upper) +
                         prob_at_upper(x, params, upper);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("expected outcome reduces to the linear predictor without bounds") {
  RngStream rng(402);
  const MixtureParams params = random_mixture(3, rng);
  Eigen::VectorXd x(2);
  x << 1.0, -0.8;
  double linear = 0.0;
  for (int c = 0; c < 3; ++c) {
    linear += params.weights[c] * x.dot(params.components[c].beta);
  }
  CHECK(expected_outcome(x, params, -kInf, kInf) ==
        doctest::Approx(linear).epsilon(1e-14));
}

TEST_CASE("one sided censoring of a standard normal keeps phi(0)") {
  const MixtureParams params = single_component(0.0, 0.0, 1.0);
  Eigen::VectorXd x(2);
  x << 1.0, 0.0;
  // E[max(0, Z)] = phi(0)
  CHECK(expected_outcome(x, params, 0.0, kInf) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-14));
  // E[Z | Z > 0] = phi(0) / (1/2)
  CHECK(expected_outcome_interior(x, params, 0.0, kInf) ==
        doctest::Approx(0.7978845608028654).epsilon(1e-14));
}

TEST_CASE("closed form mean matches quadrature on randomized parameters") {
  RngStream rng(403);
  for (int rep = 0; rep < 10; ++rep) {
    const MixtureParams params = random_mixture(1 + rep % 3, rng);
    Eigen::VectorXd x(2);
    x << 1.0, 2.0 * rng.normal();
    const double lower = -1.0 + rng.uniform();
    const double upper = lower + 1.0 + 4.0 * rng.uniform();
    const double closed = expected_outcome(x, params, lower, upper);
    const double quad = quadrature_mean(x, params, lower, upper, 200001);
    CHECK(closed == doctest::Approx(quad).epsilon(1e-6));

    const InteriorQuadrature interior =
        quadrature_interior(x, params, lower, upper, 200001);
    if (interior.prob > 1e-6) {
      CHECK(expected_outcome_interior(x, params, lower, upper) ==
            doctest::Approx(interior.mean).epsilon(1e-5));
    }
  }
}

TEST_CASE("expected outcome grows with upward mean shifts") {
  RngStream rng(404);
  Eigen::VectorXd x(2);
  x << 1.0, 0.4;
  for (int rep = 0; rep < 20; ++rep) {
    const MixtureParams params = random_mixture(2, rng);
    MixtureParams shifted = params;
    const double delta = 0.25 + rng.uniform();
    for (auto& comp : shifted.components) comp.beta[0] += delta;
    CHECK(expected_outcome(x, shifted, 0.0, 7.5) >=
          expected_outcome(x, params, 0.0, 7.5));
  }
}

TEST_CASE("conditioning on a vanishing interior fails loudly") {
  const MixtureParams params = single_component(-200.0, 0.0, 0.01);
  Eigen::VectorXd x(2);
  x << 1.0, 0.0;
  CHECK_THROWS_AS(expected_outcome_interior(x, params, 0.0, 7.5),
                  EvaluationError);
  CHECK_THROWS_AS(expected_outcome(x, params, 7.5, 0.0), ValidationError);
}

TEST_CASE("marginal effects collapse to the weighted slope without censoring") {
  RngStream make(405);
  ObservationSet data = draw_demo_data(40, demo_mixture(), make, -kInf, kInf);
  data.y = data.X * Eigen::Vector2d(1.0, 0.5);  // interior everywhere

  DrawStore store;
  store.draws.push_back(demo_mixture());
  store.draws.push_back(single_component(2.0, -0.3, 0.5));
  store.pointwise.resize(2, 0);

  const Eigen::VectorXd cont =
      average_marginal_effect(store, data, 1, Treatment::kContinuous);
  const Eigen::VectorXd bin =
      average_marginal_effect(store, data, 1, Treatment::kBinary);

  const MixtureParams& demo = store.draws[0];
  double slope = 0.0;
  for (int c = 0; c < 3; ++c) {
    slope += demo.weights[c] * demo.components[c].beta[1];
  }
  CHECK(cont[0] == doctest::Approx(slope).epsilon(1e-12));
  CHECK(cont[1] == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(bin[0] == doctest::Approx(slope).epsilon(1e-9));
  CHECK(bin[1] == doctest::Approx(-0.3).epsilon(1e-9));
}

TEST_CASE("continuous marginal effect matches finite differences") {
  RngStream make(406);
  const ObservationSet data = draw_demo_data(50, demo_mixture(), make);
  DrawStore store;
  store.draws.push_back(demo_mixture());
  store.pointwise.resize(1, 0);

  const Eigen::VectorXd ame =
      average_marginal_effect(store, data, 1, Treatment::kContinuous);

  const double scale = std::sqrt(
      (data.X.col(1).array() - data.X.col(1).mean()).square().mean());
  const double h = 1e-4 * scale;
  double diff = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    Eigen::VectorXd up = data.X.row(i);
    Eigen::VectorXd down = up;
    up[1] += h;
    down[1] -= h;
    diff += (expected_outcome(up, store.draws[0], data.lower[i],
                              data.upper[i]) -
             expected_outcome(down, store.draws[0], data.lower[i],
                              data.upper[i])) /
            (2.0 * h);
  }
  diff /= static_cast<double>(data.n());
  CHECK(ame[0] == doctest::Approx(diff).epsilon(1e-6));
}

TEST_CASE("binary marginal effect is the average group contrast") {
  RngStream make(407);
  ObservationSet data = draw_demo_data(30, demo_mixture(), make);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    data.X(i, 1) = (i % 2 == 0) ? 1.0 : 0.0;
  }
  DrawStore store;
  store.draws.push_back(demo_mixture());
  store.pointwise.resize(1, 0);

  const Eigen::VectorXd ame =
      average_marginal_effect(store, data, 1, Treatment::kBinary);
  double expect = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    Eigen::VectorXd on = data.X.row(i);
    Eigen::VectorXd off = on;
    on[1] = 1.0;
    off[1] = 0.0;
    expect += expected_outcome(on, store.draws[0], data.lower[i],
                               data.upper[i]) -
              expected_outcome(off, store.draws[0], data.lower[i],
                               data.upper[i]);
  }
  expect /= static_cast<double>(data.n());
  CHECK(ame[0] == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS(average_marginal_effect(store, data, 2,
                                          Treatment::kContinuous),
                  ValidationError);
}

TEST_CASE("marginal effects ignore component order") {
  RngStream make(408);
  const ObservationSet data = draw_demo_data(30, demo_mixture(), make);
  DrawStore store;
  store.draws.push_back(demo_mixture());
  store.pointwise.resize(1, 0);
  DrawStore shuffled = store;
  shuffled.draws[0] = permute_components(shuffled.draws[0], {2, 0, 1});

  for (Treatment t : {Treatment::kContinuous, Treatment::kBinary}) {
    const Eigen::VectorXd a = average_marginal_effect(store, data, 1, t);
    const Eigen::VectorXd b = average_marginal_effect(shuffled, data, 1, t);
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-13));
  }
}

TEST_CASE("mean density curve averages the draws") {
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  Eigen::VectorXd grid(3);
  grid << 0.5, 2.5, 6.0;

  DrawStore store;
  store.draws.push_back(demo_mixture());
  store.draws.push_back(single_component(2.0, 0.0, 0.5));
  store.pointwise.resize(2, 0);

  const Eigen::VectorXd curve =
      mean_continuous_density(store, x0, grid, 0.0, 7.5);
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const double expect =
        0.5 * (censored_density(grid[g], x0, 0.0, 7.5, store.draws[0])
                   .continuous +
               censored_density(grid[g], x0, 0.0, 7.5, store.draws[1])
                   .continuous);
    CHECK(curve[g] == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("density band percentiles use nearest rank") {
  Eigen::VectorXd grid(2);
  grid << 1.0, 2.0;
  std::vector<Eigen::VectorXd> curves;
  for (int r = 1; r <= 200; ++r) {
    curves.push_back(Eigen::VectorXd::Constant(2, r / 200.0));
  }
  const DensityBand band = density_band(curves, grid);
  CHECK(band.q05_curve[0] == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(band.q95_curve[1] == doctest::Approx(0.95).epsilon(1e-14));
  CHECK(band.mean_curve[0] == doctest::Approx(0.5025).epsilon(1e-13));
  CHECK(band.grid == grid);

  // identical replicates collapse the band onto the mean
  std::vector<Eigen::VectorXd> same(5, Eigen::VectorXd::Constant(2, 0.3));
  const DensityBand flat = density_band(same, grid);
  CHECK(flat.mean_curve == flat.q05_curve);
  CHECK(flat.mean_curve == flat.q95_curve);
  CHECK(flat.mean_curve[0] == doctest::Approx(0.3).epsilon(1e-15));

  CHECK_THROWS_AS(density_band({curves[0]}, grid), ValidationError);
  std::vector<Eigen::VectorXd> ragged = {Eigen::VectorXd::Zero(2),
                                         Eigen::VectorXd::Zero(3)};
  CHECK_THROWS_AS(density_band(ragged, grid), ValidationError);
  std::vector<Eigen::VectorXd> negative = {
      Eigen::VectorXd::Constant(2, -0.1), Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(density_band(negative, grid), ValidationError);
}

TEST_CASE("band quantiles bracket each other on random curves") {
  RngStream rng(409);
  Eigen::VectorXd grid(7);
  grid << 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  std::vector<Eigen::VectorXd> curves;
  for (int r = 0; r < 17; ++r) {
    Eigen::VectorXd curve(7);
    for (int g = 0; g < 7; ++g) curve[g] = rng.uniform();
    curves.push_back(curve);
  }
  const DensityBand band = density_band(curves, grid);
  for (int g = 0; g < 7; ++g) {
    CHECK(band.q05_curve[g] <= band.q95_curve[g]);
    CHECK(band.q05_curve[g] >= 0.0);
  }
}

TEST_CASE("replicate chains recover the generating density") {
  const MixtureParams truth = demo_mixture();
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  Eigen::VectorXd grid(41);
  for (int g = 0; g < 41; ++g) grid[g] = 7.5 * g / 40.0;

  ChainSettings settings;
  settings.n_components = 3;
  settings.n_draws = 800;
  settings.burn_in = 400;
  settings.init = InitScheme::kLeastSquaresPerturb;
  const Hyperpriors hyper = Hyperpriors::simulation_defaults(3, 2);

  RngStream seeds(410);
  std::vector<DrawStore> stores;
  for (int r = 0; r < 4; ++r) {
    RngStream make = seeds.substream(static_cast<std::uint64_t>(r));
    const ObservationSet data = draw_demo_data(400, truth, make);
    RngStream rng = seeds.substream(100 + static_cast<std::uint64_t>(r));
    stores.push_back(run_chain(data, hyper, settings, rng));
  }
  const DensityBand band = density_band(stores, x0, grid, 0.0, 7.5);

  double l1 = 0.0;
  for (int g = 0; g < 41; ++g) {
    const double f_true =
        censored_density(std::max(grid[g], 1e-9), x0, 0.0, 7.5, truth)
            .continuous;
    const double w = (g == 0 || g == 40) ? 0.5 : 1.0;
    l1 += w * std::abs(band.mean_curve[g] - f_true);
  }
  l1 *= 7.5 / 40.0;
  CHECK(l1 < 0.15);
  for (int g = 0; g < 41; ++g) {
    CHECK(band.q05_curve[g] <= band.q95_curve[g]);
    CHECK(band.mean_curve[g] >= 0.0);
  }
}
