#ifndef MIXTOBIT_TESTS_TEST_UTIL_HPP_
#define MIXTOBIT_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <vector>

namespace testutil {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

inline Moments sample_moments(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(xs.size() - 1);
  return m;
}

// Monte Carlo standard error of the mean via batch means, robust to the
// mild autocorrelation of Gibbs output.
inline double batch_se(const std::vector<double>& xs, int n_batches = 25) {
  const int m = static_cast<int>(xs.size()) / n_batches;
  std::vector<double> bm(n_batches, 0.0);
  for (int b = 0; b < n_batches; ++b) {
    for (int j = 0; j < m; ++j) bm[b] += xs[b * m + j];
    bm[b] /= m;
  }
  const Moments mo = sample_moments(bm);
  return std::sqrt(mo.var / n_batches);
}

}  // namespace testutil

#endif  // MIXTOBIT_TESTS_TEST_UTIL_HPP_
