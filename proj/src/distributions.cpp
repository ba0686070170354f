#include "mixtobit/distributions.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "mixtobit/errors.hpp"

namespace mixtobit {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727417803297;
constexpr double kTailThreshold = 4.0;

// Wichura's PPND16 rational approximations.
double quantile_central(double q) {
  const double r = 0.180625 - q * q;
  const double num =
      q *
      (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
            6.7265770927008700853e+4) *
               r +
           4.5921953931549871457e+4) *
              r +
          1.3731693765509461125e+4) *
             r +
         1.9715909503065514427e+3) *
            r +
        1.3314166789178437745e+2) *
           r +
       3.3871328727963666080e+0);
  const double den =
      (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
            3.9307895800092710610e+4) *
               r +
           2.1213794301586595867e+4) *
              r +
          5.3941960214247511077e+3) *
             r +
         6.8718700749205790830e+2) *
            r +
        4.2313330701600911252e+1) *
           r +
       1.0);
  return num / den;
}

double quantile_tail(double r) {
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
             2.41780725177450611770e-1) *
                r +
            1.27045825245236838258e+0) *
               r +
           3.64784832476320460504e+0) *
              r +
          5.76949722146069140550e+0) *
             r +
         4.63033784615654529590e+0) *
            r +
        1.42343711074968357734e+0;
    const double den =
        ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
             1.51986665636164571966e-2) *
                r +
            1.48103976427480074590e-1) *
               r +
           6.89767334985100004550e-1) *
              r +
          1.67638483018380384940e+0) *
             r +
         2.05319162663775882187e+0) *
            r +
        1.0;
    return num / den;
  }
  r -= 5.0;
  const double num =
      ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
           1.24266094738807843860e-3) *
              r +
          2.65321895265761230930e-2) *
             r +
         2.96560571828504891230e-1) *
            r +
        1.78482653991729133580e+0) *
           r +
       5.46378491116411436990e+0) *
          r +
      6.65790464350110377720e+0;
  const double den =
      ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
           1.84631831751005468180e-5) *
              r +
          7.86869131145613259100e-4) *
             r +
         1.48753612908506148525e-2) *
            r +
        1.36929880922735805310e-1) *
           r +
       5.99832206555887937690e-1) *
          r +
      1.0;
  return num / den;
}

// One standard normal draw restricted to [a, b] with a >= kTailThreshold.
double tail_draw(double a, double b, RngStream& rng) {
  if (std::isfinite(b) && 0.5 * (a * a - b * b) > std::log(0.25)) {
    for (;;) {
      const double x = a + (b - a) * rng.uniform();
      if (std::log(rng.uniform()) <= 0.5 * (a * a - x * x)) return x;
    }
  }
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double x = a - std::log(rng.uniform()) / alpha;
    if (x >= b) continue;
    const double d = x - alpha;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
  }
}

}  // namespace

double normal_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

double log_normal_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double log_normal_cdf(double z) {
  if (z >= -1.0) return std::log1p(-0.5 * std::erfc(z * M_SQRT1_2));
  if (z > -20.0) return std::log(0.5 * std::erfc(-z * M_SQRT1_2));
  // asymptotic series for the far left tail
  const double zsq = z * z;
  double term = 1.0;
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 40; ++k) {
    term *= -(2.0 * k - 1.0) / zsq;
    if (std::abs(term) >= prev) break;
    sum += term;
    prev = std::abs(term);
    if (prev < 1e-17) break;
  }
  return -0.5 * zsq - std::log(-z) - kLogSqrt2Pi + std::log1p(sum);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("normal_quantile: p must lie strictly in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) return quantile_central(q);
  const double tail = q < 0.0 ? p : 1.0 - p;
  const double r = std::sqrt(-std::log(tail));
  const double z = quantile_tail(r);
  return q < 0.0 ? -z : z;
}

double sample_truncated_normal(double mean, double variance, double lower,
                               double upper, RngStream& rng) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ValidationError(
        "truncated normal: variance must be a positive finite real");
  }
  if (!(lower < upper)) {
    throw ValidationError("truncated normal: lower bound must be below upper");
  }
  const double sd = std::sqrt(variance);
  const double a = (lower - mean) / sd;
  const double b = (upper - mean) / sd;

  double z;
  if (a >= kTailThreshold) {
    z = tail_draw(a, b, rng);
  } else if (b <= -kTailThreshold) {
    z = -tail_draw(-b, -a, rng);
  } else {
    const double u = rng.uniform();
    if (a >= 0.0) {
      // complementary scale keeps right-tail resolution
      const double qa = normal_cdf(-a);
      const double qb = std::isinf(b) ? 0.0 : normal_cdf(-b);
      const double q = qa + u * (qb - qa);
      z = -normal_quantile(q);
    } else {
      const double pa = std::isinf(a) ? 0.0 : normal_cdf(a);
      const double pb = normal_cdf(b);
      const double q = pa + u * (pb - pa);
      z = normal_quantile(q);
    }
  }

  double x = mean + sd * z;
  if (x <= lower) x = std::nextafter(lower, upper);
  if (x >= upper) x = std::nextafter(upper, lower);
  return x;
}

double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw ValidationError("inverse gamma: shape and scale must be positive");
  }
  return scale / rng.gamma(shape);
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& concentrations,
                                 RngStream& rng) {
  if (concentrations.size() == 0) {
    throw ValidationError("dirichlet: need at least one concentration");
  }
  Eigen::VectorXd g(concentrations.size());
  for (Eigen::Index c = 0; c < concentrations.size(); ++c) {
    if (!(concentrations[c] > 0.0)) {
      throw ValidationError("dirichlet: concentrations must be positive");
    }
    g[c] = rng.gamma(concentrations[c]);
  }
  const double total = g.sum();
  if (!(total > 0.0)) {
    throw NumericalError("dirichlet: gamma draws underflowed to zero");
  }
  return g / total;
}

int sample_categorical(const Eigen::VectorXd& probs, RngStream& rng) {
  if (probs.size() == 0) {
    throw ValidationError("categorical: need at least one probability");
  }
  double total = 0.0;
  for (Eigen::Index c = 0; c < probs.size(); ++c) {
    if (!(probs[c] >= 0.0) || !std::isfinite(probs[c])) {
      throw ValidationError("categorical: probabilities must be nonnegative");
    }
    total += probs[c];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("categorical: probabilities must sum to 1");
  }
  const double u = rng.uniform() * total;
  double cum = 0.0;
  for (Eigen::Index c = 0; c < probs.size(); ++c) {
    cum += probs[c];
    if (u <= cum) return static_cast<int>(c);
  }
  return static_cast<int>(probs.size() - 1);
}

Eigen::VectorXd sample_mv_normal(const Eigen::VectorXd& mean,
                                 const Eigen::MatrixXd& covariance,
                                 RngStream& rng) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw ValidationError("mv normal: covariance shape must match mean");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("mv normal: covariance is not positive definite");
  }
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + llt.matrixL() * z;
}

}  // namespace mixtobit
