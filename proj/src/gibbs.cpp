#include "mixtobit/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mixtobit/distributions.hpp"
#include "mixtobit/errors.hpp"

namespace mixtobit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kCollapseStreak = 500;

std::string component_tag(int c) {
  return "component " + std::to_string(c + 1);
}

}  // namespace

Hyperpriors Hyperpriors::symmetric(int n_components, Eigen::Index p,
                                   double alpha_c, double omega_tau,
                                   double ig_shape_c, double ig_scale_c) {
  Hyperpriors h;
  h.alpha = Eigen::VectorXd::Constant(n_components, alpha_c);
  h.mu.assign(n_components, Eigen::VectorXd::Zero(p));
  h.omega.assign(n_components,
                 omega_tau * Eigen::MatrixXd::Identity(p, p));
  h.ig_shape = Eigen::VectorXd::Constant(n_components, ig_shape_c);
  h.ig_scale = Eigen::VectorXd::Constant(n_components, ig_scale_c);
  return h;
}

Hyperpriors Hyperpriors::simulation_defaults(int n_components,
                                             Eigen::Index p) {
  return symmetric(n_components, p, 1.0 / n_components, 10.0, 0.0, 0.0);
}

void Hyperpriors::validate(int n_components, Eigen::Index p) const {
  if (alpha.size() != n_components || ig_shape.size() != n_components ||
      ig_scale.size() != n_components ||
      static_cast<int>(mu.size()) != n_components ||
      static_cast<int>(omega.size()) != n_components) {
    throw ValidationError("hyperpriors: sized for a different component count");
  }
  for (int c = 0; c < n_components; ++c) {
    if (!(alpha[c] > 0.0) || !std::isfinite(alpha[c])) {
      throw ValidationError("hyperpriors: alpha must be strictly positive");
    }
    if (!(ig_shape[c] >= 0.0) || !(ig_scale[c] >= 0.0)) {
      throw ValidationError("hyperpriors: IG shape/scale must be nonnegative");
    }
    if (mu[c].size() != p) {
      throw ValidationError("hyperpriors: mu length differs from regressors");
    }
    if (omega[c].rows() != p || omega[c].cols() != p) {
      throw ValidationError("hyperpriors: omega shape differs from regressors");
    }
    const double scale = 1.0 + omega[c].cwiseAbs().maxCoeff();
    if ((omega[c] - omega[c].transpose()).cwiseAbs().maxCoeff() >
        1e-10 * scale) {
      throw ValidationError("hyperpriors: omega must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega[c]);
    if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
      throw ValidationError("hyperpriors: omega must be positive semidefinite");
    }
  }
}

void ChainSettings::validate() const {
  if (n_components < 1) {
    throw ValidationError("chain settings: need at least one component");
  }
  if (n_draws < 1) throw ValidationError("chain settings: n_draws must be >= 1");
  if (burn_in < 0 || burn_in >= n_draws) {
    throw ValidationError("chain settings: burn_in must be in [0, n_draws)");
  }
  if (thin < 1) throw ValidationError("chain settings: thin must be >= 1");
}

void validate_state(const GibbsState& state, const ObservationSet& data) {
  const int C = state.params.n_components();
  if (state.labels.size() != data.n() || state.augmented.size() != data.n()) {
    throw ValidationError("state: label/augmented length differs from data");
  }
  state.params.validate(data.p());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (state.labels[i] < 0 || state.labels[i] >= C) {
      throw ValidationError("state: label out of range in row " +
                            std::to_string(i));
    }
    switch (data.status(i)) {
      case CensorStatus::kInterior:
        if (state.augmented[i] != data.y[i]) {
          throw ValidationError("state: interior augmentation differs from y");
        }
        break;
      case CensorStatus::kLeft:
        if (!(state.augmented[i] < data.lower[i])) {
          throw ValidationError(
              "state: left-censored augmentation not below the bound");
        }
        break;
      case CensorStatus::kRight:
        if (!(state.augmented[i] > data.upper[i])) {
          throw ValidationError(
              "state: right-censored augmentation not above the bound");
        }
        break;
    }
  }
}

std::vector<int> class_processing_order(const Eigen::VectorXi& labels,
                                        const MixtureParams& params) {
  const int C = params.n_components();
  std::vector<Eigen::Index> first(C, -1);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (first[c] < 0) first[c] = i;
  }
  std::vector<int> order(C);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const bool empty_a = first[a] < 0;
    const bool empty_b = first[b] < 0;
    if (empty_a != empty_b) return empty_b;
    if (!empty_a) return first[a] < first[b];
    const ComponentParams& ca = params.components[a];
    const ComponentParams& cb = params.components[b];
    if (ca.sigma2 != cb.sigma2) return ca.sigma2 < cb.sigma2;
    for (Eigen::Index j = 0; j < ca.beta.size(); ++j) {
      if (ca.beta[j] != cb.beta[j]) return ca.beta[j] < cb.beta[j];
    }
    return a < b;
  });
  return order;
}

GibbsState init_state(const ObservationSet& data,
                      const ChainSettings& settings, const Hyperpriors& hyper,
                      RngStream& rng) {
  data.validate();
  settings.validate();
  const int C = settings.n_components;
  const Eigen::Index p = data.p();
  hyper.validate(C, p);

  GibbsState state;
  Eigen::VectorXd pi0;
  if (settings.init == InitScheme::kDefault) {
    pi0 = hyper.alpha / hyper.alpha.sum();
    for (int c = 0; c < C; ++c) {
      state.params.components.push_back({Eigen::VectorXd::Zero(p), 1.0});
    }
  } else {
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
    Eigen::Index n_interior = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      if (data.status(i) != CensorStatus::kInterior) continue;
      ++n_interior;
      xtx.noalias() += data.X.row(i).transpose() * data.X.row(i);
      xty.noalias() += data.X.row(i).transpose() * data.y[i];
    }
    if (n_interior <= p) {
      throw ValidationError(
          "least-squares init: need more interior rows than regressors");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(xtx);
    if (llt.info() != Eigen::Success) {
      throw SingularMatrixError(
          "least-squares init: singular design on interior rows");
    }
    const Eigen::VectorXd beta_ls = llt.solve(xty);
    double sse = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      if (data.status(i) != CensorStatus::kInterior) continue;
      const double r = data.y[i] - data.X.row(i).dot(beta_ls);
      sse += r * r;
    }
    const double s2 = sse / static_cast<double>(n_interior - p);
    if (!(s2 > 0.0)) {
      throw ValidationError(
          "least-squares init: zero residual variance on interior rows");
    }
    for (int c = 0; c < C; ++c) {
      const double mb = rng.uniform(0.8, 1.2);
      const double ms = rng.uniform(0.8, 1.2);
      const double sd = std::sqrt(s2) * ms;
      state.params.components.push_back({beta_ls * mb, sd * sd});
    }
    pi0 = Eigen::VectorXd::Constant(C, 1.0 / C);
  }
  state.params.weights = pi0;

  state.labels.resize(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    state.labels[i] = sample_categorical(pi0, rng);
  }
  state.augmented = data.y;
  draw_missing_outcomes(state, data, rng);
  return state;
}

void draw_missing_outcomes(GibbsState& state, const ObservationSet& data,
                           RngStream& rng) {
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const CensorStatus status = data.status(i);
    if (status == CensorStatus::kInterior) continue;
    const ComponentParams& comp = state.params.components[state.labels[i]];
    const double m = data.X.row(i).dot(comp.beta);
    if (status == CensorStatus::kLeft) {
      state.augmented[i] = sample_truncated_normal(m, comp.sigma2, kNegInf,
                                                   data.lower[i], rng);
    } else {
      state.augmented[i] = sample_truncated_normal(
          m, comp.sigma2, data.upper[i],
          std::numeric_limits<double>::infinity(), rng);
    }
  }
}

void draw_component_params(GibbsState& state, const ObservationSet& data,
                           const Hyperpriors& hyper, RngStream& rng) {
  const int C = state.params.n_components();
  const Eigen::Index p = data.p();
  std::vector<Eigen::MatrixXd> xtx(C, Eigen::MatrixXd::Zero(p, p));
  std::vector<Eigen::VectorXd> xty(C, Eigen::VectorXd::Zero(p));
  std::vector<double> ssr(C, 0.0);
  std::vector<Eigen::Index> counts(C, 0);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int c = state.labels[i];
    const auto x = data.X.row(i);
    xtx[c].noalias() += x.transpose() * x;
    xty[c].noalias() += x.transpose() * state.augmented[i];
    const double r =
        state.augmented[i] - x.dot(state.params.components[c].beta);
    ssr[c] += r * r;
    ++counts[c];
  }

  const std::vector<int> order =
      class_processing_order(state.labels, state.params);
  Eigen::VectorXd z(p);
  for (int k = 0; k < C; ++k) {
    const int c = order[k];
    const double shape = hyper.ig_shape[c] + 0.5 * counts[c];
    const double scale = hyper.ig_scale[c] + 0.5 * ssr[c];
    if (!(shape > 0.0)) {
      throw ImproperPosteriorError(
          component_tag(c) + ": improper variance posterior (zero shape)");
    }
    if (!(scale > 0.0)) {
      throw ImproperPosteriorError(
          component_tag(c) + ": improper variance posterior (zero scale)");
    }
    const double sigma2 = sample_inverse_gamma(shape, scale, rng);

    Eigen::MatrixXd prec = xtx[c] / sigma2 + hyper.omega[c];
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) {
      throw SingularMatrixError(component_tag(c) +
                                ": singular posterior precision");
    }
    const Eigen::VectorXd rhs = xty[c] / sigma2 + hyper.omega[c] * hyper.mu[c];
    const Eigen::VectorXd mean = llt.solve(rhs);
    for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
    state.params.components[c].sigma2 = sigma2;
    state.params.components[c].beta = mean + llt.matrixU().solve(z);
  }
}

Eigen::VectorXi draw_class_labels(GibbsState& state,
                                  const ObservationSet& data, RngStream& rng) {
  const int C = state.params.n_components();
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(C);
  if (C == 1) {
    counts[0] = static_cast<int>(data.n());
    return counts;
  }

  const std::vector<int> order =
      class_processing_order(state.labels, state.params);
  std::vector<double> log_weight(C), log_sd(C);
  for (int c = 0; c < C; ++c) {
    log_weight[c] = std::log(state.params.weights[c]);
    log_sd[c] = 0.5 * std::log(state.params.components[c].sigma2);
  }

  std::vector<double> logp(C), prob(C);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double shift = kNegInf;
    for (int k = 0; k < C; ++k) {
      const int c = order[k];
      const ComponentParams& comp = state.params.components[c];
      const double zres = (state.augmented[i] - data.X.row(i).dot(comp.beta)) /
                          std::sqrt(comp.sigma2);
      logp[k] = log_weight[c] + log_normal_pdf(zres) - log_sd[c];
      shift = std::max(shift, logp[k]);
    }
    if (shift == kNegInf) {
      throw EvaluationError("class probabilities vanished at observation " +
                            std::to_string(i));
    }
    double total = 0.0;
    for (int k = 0; k < C; ++k) total += std::exp(logp[k] - shift);
    for (int k = 0; k < C; ++k) prob[k] = std::exp(logp[k] - shift) / total;

    const double u = rng.uniform();
    double cum = 0.0;
    int chosen = order[C - 1];
    for (int k = 0; k < C; ++k) {
      cum += prob[k];
      if (u <= cum) {
        chosen = order[k];
        break;
      }
    }
    state.labels[i] = chosen;
    ++counts[chosen];
  }
  return counts;
}

Eigen::VectorXd draw_mixture_weights(const Eigen::VectorXi& class_counts,
                                     const Hyperpriors& hyper, RngStream& rng,
                                     const std::vector<int>& order) {
  const int C = static_cast<int>(class_counts.size());
  Eigen::VectorXd g(C);
  double total = 0.0;
  for (int k = 0; k < C; ++k) {
    const int c = order.empty() ? k : order[k];
    // tiny concentrations can underflow the gamma variate to exact zero;
    // keep the weight strictly positive as the simplex contract requires
    g[c] = std::max(rng.gamma(hyper.alpha[c] + class_counts[c]),
                    std::numeric_limits<double>::min());
    total += g[c];
  }
  return g / total;
}

DrawStore run_chain(const ObservationSet& data, const Hyperpriors& hyper,
                    const ChainSettings& settings, RngStream& rng) {
  return run_chain_from(init_state(data, settings, hyper, rng), data, hyper,
                        settings, rng);
}

DrawStore run_chain_from(GibbsState state, const ObservationSet& data,
                         const Hyperpriors& hyper,
                         const ChainSettings& settings, RngStream& rng) {
  data.validate();
  settings.validate();
  hyper.validate(settings.n_components, data.p());
  if (state.params.n_components() != settings.n_components) {
    throw ValidationError("state: component count differs from settings");
  }
  validate_state(state, data);

  const int C = settings.n_components;
  DrawStore store;
  store.settings = settings;
  store.seed = rng.seed();
  const int S = settings.retained();
  store.draws.reserve(S);
  store.pointwise.resize(S, data.n());

  const double low_weight = 1.0 / (10.0 * static_cast<double>(data.n()));
  std::vector<int> low_streak(C, 0);
  std::vector<bool> noted(C, false);

  int s = 0;
  for (int t = 1; t <= settings.n_draws; ++t) {
    try {
      draw_missing_outcomes(state, data, rng);
      draw_component_params(state, data, hyper, rng);
      const Eigen::VectorXi counts = draw_class_labels(state, data, rng);
      const std::vector<int> order =
          class_processing_order(state.labels, state.params);
      state.params.weights = draw_mixture_weights(counts, hyper, rng, order);
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError("iteration " + std::to_string(t) + ": " +
                                e.what());
    } catch (const ImproperPosteriorError& e) {
      throw ImproperPosteriorError("iteration " + std::to_string(t) + ": " +
                                   e.what());
    } catch (const EvaluationError& e) {
      throw EvaluationError("iteration " + std::to_string(t) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(t) + ": " + e.what());
    }
#ifndef NDEBUG
    validate_state(state, data);
#endif
    for (int c = 0; c < C; ++c) {
      if (state.params.weights[c] < low_weight) {
        if (++low_streak[c] == kCollapseStreak && !noted[c]) {
          noted[c] = true;
          store.collapse_notes.push_back({c, t});
        }
      } else {
        low_streak[c] = 0;
      }
    }
    if (t > settings.burn_in && (t - settings.burn_in) % settings.thin == 0) {
      store.draws.push_back(state.params);
      store.pointwise.row(s++) = pointwise_loglik(data, state.params);
    }
  }
  return store;
}

DrawStore relabel_draws(const DrawStore& store, RelabelRule rule) {
  if (rule == RelabelRule::kNone) return store;
  DrawStore out = store;
  for (MixtureParams& draw : out.draws) {
    const int C = draw.n_components();
    std::vector<int> perm(C);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
      if (rule == RelabelRule::kByIntercept) {
        return draw.components[a].beta[0] < draw.components[b].beta[0];
      }
      return draw.weights[a] < draw.weights[b];
    });
    draw = permute_components(draw, perm);
  }
  return out;
}

}  // namespace mixtobit
