#ifndef MIXTOBIT_COMMANDS_HPP_
#define MIXTOBIT_COMMANDS_HPP_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixtobit/gibbs.hpp"
#include "mixtobit/io.hpp"

namespace mixtobit {

// One flat bag of settings shared by every workflow, mirroring the config
// file line for line. List-valued entries are comma-separated strings so
// that the file, the command line, and this struct all agree.
struct RunConfig {
  // data source: a csv on disk or a builtin process, never both
  std::string dataset;
  int dgp = 0;

  // dataset layout
  std::string outcome = "y";
  std::string covariates;  // comma-separated column names
  std::string lower_column;
  std::string upper_column;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool add_intercept = true;

  // chain
  int components = 1;
  int draws = 2000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  std::string init = "default";

  // priors: pi ~ Dirichlet(alpha,...) with 0 meaning 1/C, beta precision
  // tau * I, variance IG(ig_shape, ig_scale)
  double alpha = 0.0;
  double tau = 10.0;
  double ig_shape = 0.0;
  double ig_scale = 0.0;

  // simulation and replicate study
  int n_obs = 2000;
  std::string dgps = "1";
  std::string component_counts = "3";
  int replicates = 20;
  int parallelism = 1;

  // workflow
  std::string out_dir = "out";
  std::string query;
  std::string stores;  // comma-separated draw-store directories

  ChainSettings chain_settings() const;
  DatasetSchema dataset_schema() const;
  Hyperpriors hyperpriors(Eigen::Index p) const;

  std::vector<std::string> covariate_list() const;
  std::vector<std::string> store_list() const;
  std::vector<int> dgp_list() const;
  std::vector<int> component_count_list() const;
};

// key = value lines, # comments, double quotes around strings optional.
// Unknown keys are errors so that typos do not silently fall back to
// defaults.
RunConfig read_config(const std::string& path);
void write_config(const std::string& path, const RunConfig& config,
                  const std::string& command);

// Each workflow validates its slice of the config, writes its files under
// out_dir, and returns the log lines a front end should print.
std::vector<std::string> cmd_simulate(const RunConfig& config);
std::vector<std::string> cmd_fit(const RunConfig& config);
std::vector<std::string> cmd_metrics(const RunConfig& config);
std::vector<std::string> cmd_summarize(const RunConfig& config);
std::vector<std::string> cmd_replicate(const RunConfig& config);

}  // namespace mixtobit

#endif  // MIXTOBIT_COMMANDS_HPP_
