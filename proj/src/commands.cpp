#include "mixtobit/commands.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mixtobit/errors.hpp"
#include "mixtobit/fit.hpp"
#include "mixtobit/model.hpp"
#include "mixtobit/posterior.hpp"
#include "mixtobit/rng.hpp"
#include "mixtobit/simulate.hpp"

namespace mixtobit {

namespace {

std::string trim(const std::string& s) {
  std::size_t first = 0;
  std::size_t last = s.size();
  while (first < last && std::isspace(static_cast<unsigned char>(s[first]))) {
    ++first;
  }
  while (last > first && std::isspace(static_cast<unsigned char>(s[last - 1]))) {
    --last;
  }
  return s.substr(first, last - first);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> items;
  std::string::size_type start = 0;
  while (start <= csv.size()) {
    const std::string::size_type comma = csv.find(',', start);
    const std::string item =
        trim(csv.substr(start, comma == std::string::npos ? std::string::npos
                                                          : comma - start));
    if (!item.empty()) {
      items.push_back(item);
    }
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return items;
}

int parse_int(const std::string& text, const std::string& context) {
  int value = 0;
  const char* last = text.data() + text.size();
  const std::from_chars_result res = std::from_chars(text.data(), last, value);
  if (res.ec != std::errc() || res.ptr != last || text.empty()) {
    throw ValidationError(context + ": '" + text + "' is not an integer");
  }
  return value;
}

std::uint64_t parse_seed(const std::string& text, const std::string& context) {
  std::uint64_t value = 0;
  const char* last = text.data() + text.size();
  const std::from_chars_result res = std::from_chars(text.data(), last, value);
  if (res.ec != std::errc() || res.ptr != last || text.empty()) {
    throw ValidationError(context + ": '" + text + "' is not a seed");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& context) {
  if (text == "true") {
    return true;
  }
  if (text == "false") {
    return false;
  }
  throw ValidationError(context + ": '" + text + "' is not true or false");
}

std::vector<int> parse_int_list(const std::string& csv,
                                const std::string& context) {
  std::vector<int> values;
  for (const std::string& item : split_list(csv)) {
    values.push_back(parse_int(item, context));
  }
  return values;
}

std::string joined(const std::filesystem::path& dir, const std::string& name) {
  return (dir / name).string();
}

// Bound pair shared by every row, for quantities evaluated at a synthetic
// covariate vector rather than at observed rows.
std::pair<double, double> shared_bounds(const ObservationSet& data,
                                        const std::string& what) {
  const double lo = data.lower[0];
  const double up = data.upper[0];
  for (Eigen::Index i = 1; i < data.n(); ++i) {
    if (data.lower[i] != lo || data.upper[i] != up) {
      throw ValidationError(what +
                            " needs censoring bounds shared by every row");
    }
  }
  return {lo, up};
}

Eigen::Index resolve_covariate(const RunConfig& config,
                               const std::string& name) {
  const std::vector<std::string> names = config.covariate_list();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) {
      return static_cast<Eigen::Index>(j) + (config.add_intercept ? 1 : 0);
    }
  }
  throw ValidationError("column '" + name + "' is not a model covariate");
}

std::map<std::string, std::string> query_pairs(
    const std::vector<std::string>& tokens, const std::string& kind,
    const std::vector<std::string>& allowed) {
  std::map<std::string, std::string> pairs;
  for (std::size_t t = 1; t < tokens.size(); ++t) {
    const std::string::size_type eq = tokens[t].find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("query '" + kind + "': expected key=value, got '" +
                            tokens[t] + "'");
    }
    const std::string key = tokens[t].substr(0, eq);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("query '" + kind + "' does not take '" + key + "'");
    }
    if (!pairs.emplace(key, tokens[t].substr(eq + 1)).second) {
      throw ValidationError("query '" + kind + "': '" + key +
                            "' given twice");
    }
  }
  return pairs;
}

ObservationSet ingest_for(const RunConfig& config, const std::string& command,
                          std::vector<std::string>& notes) {
  if (config.dataset.empty()) {
    throw ValidationError(command + " needs dataset=<csv path>");
  }
  if (config.dgp != 0) {
    throw ValidationError(command + " reads a dataset: set dataset, not dgp");
  }
  IngestResult result = ingest_csv(config.dataset, config.dataset_schema());
  if (result.dropped_rows > 0) {
    notes.push_back("dropped " + std::to_string(result.dropped_rows) +
                    " rows with missing values from " + config.dataset);
  }
  return std::move(result.data);
}

StoredChain load_checked(const std::string& store_dir,
                         const std::string& dataset_digest,
                         const std::string& dataset) {
  StoredChain loaded = load_draw_store(store_dir);
  if (loaded.data_digest != dataset_digest) {
    throw ValidationError("store " + store_dir + " was fit on different data "
                          "(store digest " + loaded.data_digest +
                          ", " + dataset + " digest " + dataset_digest + ")");
  }
  return loaded;
}

std::string num(double v) { return format_double(v); }

}  // namespace

ChainSettings RunConfig::chain_settings() const {
  ChainSettings settings;
  settings.n_components = components;
  settings.n_draws = draws;
  settings.burn_in = burn_in;
  settings.thin = thin;
  settings.seed = seed;
  settings.init = init_scheme_from_name(init);
  settings.validate();
  return settings;
}

DatasetSchema RunConfig::dataset_schema() const {
  DatasetSchema schema;
  schema.outcome = outcome;
  schema.covariates = covariate_list();
  schema.lower_column = lower_column;
  schema.upper_column = upper_column;
  schema.lower = lower;
  schema.upper = upper;
  schema.add_intercept = add_intercept;
  return schema;
}

Hyperpriors RunConfig::hyperpriors(Eigen::Index p) const {
  if (!(tau >= 0.0)) {
    throw ValidationError("tau must be nonnegative");
  }
  if (!(alpha >= 0.0)) {
    throw ValidationError("alpha must be nonnegative");
  }
  if (!(ig_shape >= 0.0) || !(ig_scale >= 0.0)) {
    throw ValidationError("ig_shape and ig_scale must be nonnegative");
  }
  const double alpha_c = alpha > 0.0 ? alpha : 1.0 / components;
  Hyperpriors hyper =
      Hyperpriors::symmetric(components, p, alpha_c, tau, ig_shape, ig_scale);
  hyper.validate(components, p);
  return hyper;
}

std::vector<std::string> RunConfig::covariate_list() const {
  return split_list(covariates);
}

std::vector<std::string> RunConfig::store_list() const {
  return split_list(stores);
}

std::vector<int> RunConfig::dgp_list() const {
  return parse_int_list(dgps, "dgps");
}

std::vector<int> RunConfig::component_count_list() const {
  return parse_int_list(component_counts, "component-counts");
}

RunConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open " + path);
  }
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') {
      continue;
    }
    const std::string context = path + " line " + std::to_string(line_no);
    const std::string::size_type eq = stripped.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError(context + ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }

    if (key == "dataset") {
      config.dataset = value;
    } else if (key == "dgp") {
      config.dgp = parse_int(value, context);
    } else if (key == "outcome") {
      config.outcome = value;
    } else if (key == "covariates") {
      config.covariates = value;
    } else if (key == "lower-column") {
      config.lower_column = value;
    } else if (key == "upper-column") {
      config.upper_column = value;
    } else if (key == "lower") {
      config.lower = parse_double(value, context);
    } else if (key == "upper") {
      config.upper = parse_double(value, context);
    } else if (key == "add-intercept") {
      config.add_intercept = parse_bool(value, context);
    } else if (key == "components") {
      config.components = parse_int(value, context);
    } else if (key == "draws") {
      config.draws = parse_int(value, context);
    } else if (key == "burn-in") {
      config.burn_in = parse_int(value, context);
    } else if (key == "thin") {
      config.thin = parse_int(value, context);
    } else if (key == "seed") {
      config.seed = parse_seed(value, context);
    } else if (key == "init") {
      config.init = value;
    } else if (key == "alpha") {
      config.alpha = parse_double(value, context);
    } else if (key == "tau") {
      config.tau = parse_double(value, context);
    } else if (key == "ig-shape") {
      config.ig_shape = parse_double(value, context);
    } else if (key == "ig-scale") {
      config.ig_scale = parse_double(value, context);
    } else if (key == "n-obs") {
      config.n_obs = parse_int(value, context);
    } else if (key == "dgps") {
      config.dgps = value;
    } else if (key == "component-counts") {
      config.component_counts = value;
    } else if (key == "replicates") {
      config.replicates = parse_int(value, context);
    } else if (key == "parallelism") {
      config.parallelism = parse_int(value, context);
    } else if (key == "out") {
      config.out_dir = value;
    } else if (key == "query") {
      config.query = value;
    } else if (key == "stores") {
      config.stores = value;
    } else {
      throw ValidationError(context + ": unknown key '" + key + "'");
    }
  }
  return config;
}

void write_config(const std::string& path, const RunConfig& config,
                  const std::string& command) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot open " + path + " for writing");
  }
  const auto str = [](const std::string& v) { return '"' + v + '"'; };
  out << "# mixtobit " << command << "\n";
  out << "dataset = " << str(config.dataset) << "\n";
  out << "dgp = " << config.dgp << "\n";
  out << "outcome = " << str(config.outcome) << "\n";
  out << "covariates = " << str(config.covariates) << "\n";
  out << "lower-column = " << str(config.lower_column) << "\n";
  out << "upper-column = " << str(config.upper_column) << "\n";
  out << "lower = " << num(config.lower) << "\n";
  out << "upper = " << num(config.upper) << "\n";
  out << "add-intercept = " << (config.add_intercept ? "true" : "false") << "\n";
  out << "components = " << config.components << "\n";
  out << "draws = " << config.draws << "\n";
  out << "burn-in = " << config.burn_in << "\n";
  out << "thin = " << config.thin << "\n";
  out << "seed = " << config.seed << "\n";
  out << "init = " << str(config.init) << "\n";
  out << "alpha = " << num(config.alpha) << "\n";
  out << "tau = " << num(config.tau) << "\n";
  out << "ig-shape = " << num(config.ig_shape) << "\n";
  out << "ig-scale = " << num(config.ig_scale) << "\n";
  out << "n-obs = " << config.n_obs << "\n";
  out << "dgps = " << str(config.dgps) << "\n";
  out << "component-counts = " << str(config.component_counts) << "\n";
  out << "replicates = " << config.replicates << "\n";
  out << "parallelism = " << config.parallelism << "\n";
  out << "out = " << str(config.out_dir) << "\n";
  out << "query = " << str(config.query) << "\n";
  out << "stores = " << str(config.stores) << "\n";
  out.flush();
  if (!out) {
    throw ValidationError("write to " + path + " failed");
  }
}

std::vector<std::string> cmd_simulate(const RunConfig& config) {
  if (config.dgp == 0) {
    throw ValidationError("simulate needs dgp=<1..4>");
  }
  if (!config.dataset.empty()) {
    throw ValidationError("simulate generates data: set dgp, not dataset");
  }
  DgpSpec spec = builtin_dgp(config.dgp);
  spec.n = config.n_obs;
  spec.validate();

  RngStream rng(config.seed);
  Eigen::VectorXi classes;
  const ObservationSet data = generate(spec, rng, &classes);

  const std::filesystem::path out(config.out_dir);
  const std::string dataset_path = joined(out, "dataset.csv");
  write_dataset_csv(dataset_path, data, &classes);
  write_config(joined(out, "config.txt"), config, "simulate");

  std::vector<std::string> notes;
  notes.push_back("wrote " + dataset_path + ": " + std::to_string(data.n()) +
                  " rows from process " + std::to_string(config.dgp) + ", " +
                  std::to_string(data.count(CensorStatus::kLeft)) +
                  " left-censored, " +
                  std::to_string(data.count(CensorStatus::kRight)) +
                  " right-censored");
  return notes;
}

std::vector<std::string> cmd_fit(const RunConfig& config) {
  std::vector<std::string> notes;
  const ObservationSet data = ingest_for(config, "fit", notes);
  const ChainSettings settings = config.chain_settings();
  const Hyperpriors hyper = config.hyperpriors(data.p());

  RngStream rng(settings.seed);
  const DrawStore store = run_chain(data, hyper, settings, rng);

  const std::filesystem::path out(config.out_dir);
  write_draw_store(config.out_dir, store, file_digest(config.dataset));
  write_config(joined(out, "config.txt"), config, "fit");

  notes.push_back("retained " + std::to_string(store.n_retained()) +
                  " draws for " + std::to_string(settings.n_components) +
                  " components on " + std::to_string(data.n()) + " rows");
  for (const CollapseNote& note : store.collapse_notes) {
    notes.push_back("component collapse: component " +
                    std::to_string(note.component + 1) +
                    " weight stayed below 1/(10n) for 500 sweeps ending at "
                    "iteration " + std::to_string(note.iteration));
  }
  notes.push_back("wrote " + joined(out, "draws.csv") + ", " +
                  joined(out, "loglik.csv") + ", " + joined(out, "meta.json"));
  return notes;
}

std::vector<std::string> cmd_metrics(const RunConfig& config) {
  std::vector<std::string> notes;
  const std::vector<std::string> store_dirs = config.store_list();
  if (store_dirs.empty()) {
    throw ValidationError("metrics needs stores=<dir>[,<dir>...]");
  }
  const ObservationSet data = ingest_for(config, "metrics", notes);
  const std::string digest = file_digest(config.dataset);

  std::vector<FitReport> reports;
  for (const std::string& dir : store_dirs) {
    const StoredChain loaded = load_checked(dir, digest, config.dataset);
    reports.push_back(fit_report(loaded.store, data));
  }

  const auto criterion = [&](double FitReport::*field) {
    std::vector<double> values;
    for (const FitReport& report : reports) {
      values.push_back(report.*field);
    }
    return argmin_model(values);
  };
  const std::size_t best_aic = criterion(&FitReport::aic);
  const std::size_t best_bic = criterion(&FitReport::bic);
  const std::size_t best_dic = criterion(&FitReport::dic);
  const std::size_t best_waic = criterion(&FitReport::waic);
  const std::size_t best_loo = criterion(&FitReport::loo);

  const std::filesystem::path out(config.out_dir);
  const std::string table_path = joined(out, "metrics.csv");
  {
    std::filesystem::create_directories(out);
    std::ofstream table(table_path);
    if (!table) {
      throw ValidationError("cannot open " + table_path + " for writing");
    }
    table << "model,k_params,aic,bic,dic,waic,loo,p_dic,p_waic,"
          << "best_aic,best_bic,best_dic,best_waic,best_loo,"
          << "negative_p_dic,high_pareto_k,loo_fallbacks,small_sample\n";
    for (std::size_t m = 0; m < reports.size(); ++m) {
      const FitReport& r = reports[m];
      table << store_dirs[m] << ',' << r.k_params << ',' << num(r.aic) << ','
            << num(r.bic) << ',' << num(r.dic) << ',' << num(r.waic) << ','
            << num(r.loo) << ',' << num(r.p_dic) << ',' << num(r.p_waic) << ','
            << (m == best_aic) << ',' << (m == best_bic) << ','
            << (m == best_dic) << ',' << (m == best_waic) << ','
            << (m == best_loo) << ',' << r.negative_p_dic << ','
            << r.high_pareto_k.size() << ',' << r.loo_fallbacks.size() << ','
            << r.small_sample << '\n';
    }
    table.flush();
    if (!table) {
      throw ValidationError("write to " + table_path + " failed");
    }
  }
  write_config(joined(out, "config.txt"), config, "metrics");

  notes.push_back("wrote " + table_path + " for " +
                  std::to_string(reports.size()) + " models");
  notes.push_back("aic selects " + store_dirs[best_aic]);
  notes.push_back("bic selects " + store_dirs[best_bic]);
  notes.push_back("dic selects " + store_dirs[best_dic]);
  notes.push_back("waic selects " + store_dirs[best_waic]);
  notes.push_back("loo selects " + store_dirs[best_loo]);
  for (std::size_t m = 0; m < reports.size(); ++m) {
    if (reports[m].negative_p_dic) {
      notes.push_back("warning: negative p_dic for " + store_dirs[m]);
    }
    if (!reports[m].high_pareto_k.empty()) {
      notes.push_back("warning: " +
                      std::to_string(reports[m].high_pareto_k.size()) +
                      " observations with pareto k above 0.7 for " +
                      store_dirs[m]);
    }
  }
  return notes;
}

std::vector<std::string> cmd_summarize(const RunConfig& config) {
  std::vector<std::string> notes;
  const std::vector<std::string> store_dirs = config.store_list();
  if (store_dirs.size() != 1) {
    throw ValidationError("summarize needs stores=<one draw-store directory>");
  }
  if (config.query.empty()) {
    throw ValidationError(
        "summarize needs query=\"ame column=<name> [treatment=...]\", "
        "\"group-contrast column=<name>\", or \"band [x=...] [points=...]\"");
  }
  const ObservationSet data = ingest_for(config, "summarize", notes);
  const StoredChain loaded =
      load_checked(store_dirs[0], file_digest(config.dataset), config.dataset);
  const DrawStore& store = loaded.store;

  std::vector<std::string> tokens;
  {
    std::istringstream words(config.query);
    std::string word;
    while (words >> word) {
      tokens.push_back(word);
    }
  }
  if (tokens.empty()) {
    throw ValidationError("summarize query is blank");
  }
  const std::string kind = tokens[0];
  const std::filesystem::path out(config.out_dir);

  if (kind == "ame") {
    const auto pairs = query_pairs(tokens, kind, {"column", "treatment"});
    if (!pairs.count("column")) {
      throw ValidationError("query 'ame' needs column=<name>");
    }
    const std::string& column = pairs.at("column");
    Treatment treatment = Treatment::kContinuous;
    if (pairs.count("treatment")) {
      const std::string& t = pairs.at("treatment");
      if (t == "binary") {
        treatment = Treatment::kBinary;
      } else if (t != "continuous") {
        throw ValidationError("treatment must be continuous or binary, not '" +
                              t + "'");
      }
    }
    const Eigen::Index j = resolve_covariate(config, column);
    const Eigen::VectorXd effects =
        average_marginal_effect(store, data, j, treatment);
    const std::string path = joined(out, "ame_" + column + ".csv");
    write_series_csv(path, "draw", "ame", effects);
    const double mean = effects.mean();
    const double sd =
        effects.size() > 1
            ? std::sqrt((effects.array() - mean).square().sum() /
                        (effects.size() - 1))
            : 0.0;
    notes.push_back("ame of " + column + ": posterior mean " + num(mean) +
                    ", sd " + num(sd) + " over " +
                    std::to_string(effects.size()) + " draws");
    notes.push_back("wrote " + path);
  } else if (kind == "group-contrast") {
    const auto pairs = query_pairs(tokens, kind, {"column"});
    if (!pairs.count("column")) {
      throw ValidationError("query 'group-contrast' needs column=<name>");
    }
    const std::string& column = pairs.at("column");
    const Eigen::Index j = resolve_covariate(config, column);
    const auto [lo, up] = shared_bounds(data, "group-contrast");
    const MixtureParams at_mean = posterior_mean_params(store);

    Eigen::VectorXd x1 = data.X.colwise().mean().transpose();
    Eigen::VectorXd x0 = x1;
    x1[j] = 1.0;
    x0[j] = 0.0;

    const double pr1 = prob_at_lower(x1, at_mean, lo);
    const double pr0 = prob_at_lower(x0, at_mean, lo);
    const double interior1 = expected_outcome_interior(x1, at_mean, lo, up);
    const double interior0 = expected_outcome_interior(x0, at_mean, lo, up);
    const double mean1 = expected_outcome(x1, at_mean, lo, up);
    const double mean0 = expected_outcome(x0, at_mean, lo, up);

    const std::string path = joined(out, "contrast_" + column + ".csv");
    std::filesystem::create_directories(out);
    std::ofstream table(path);
    if (!table) {
      throw ValidationError("cannot open " + path + " for writing");
    }
    table << "quantity,value\n"
          << "pr_lower(" << column << "=1)," << num(pr1) << "\n"
          << "pr_lower_diff," << num(pr1 - pr0) << "\n"
          << "mean_interior(" << column << "=1)," << num(interior1) << "\n"
          << "mean_interior_diff," << num(interior1 - interior0) << "\n"
          << "mean_outcome(" << column << "=1)," << num(mean1) << "\n"
          << "mean_outcome_diff," << num(mean1 - mean0) << "\n";
    table.flush();
    if (!table) {
      throw ValidationError("write to " + path + " failed");
    }
    notes.push_back("contrast in " + column + " at the sample means of the "
                    "other covariates, posterior-mean parameters:");
    notes.push_back("  pr at lower bound " + num(pr1) + " vs " + num(pr0));
    notes.push_back("  mean given interior " + num(interior1) + " vs " +
                    num(interior0));
    notes.push_back("  mean outcome " + num(mean1) + " vs " + num(mean0));
    notes.push_back("wrote " + path);
  } else if (kind == "band") {
    const auto pairs = query_pairs(tokens, kind, {"x", "points"});
    const int points =
        pairs.count("points") ? parse_int(pairs.at("points"), "points") : 151;
    const auto [lo, up] = shared_bounds(data, "band");
    const Eigen::VectorXd grid = midpoint_grid(lo, up, points);

    const Eigen::Index p = data.p();
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(p);
    if (config.add_intercept) {
      x0[0] = 1.0;
    }
    if (pairs.count("x")) {
      const std::vector<std::string> raw = split_list(pairs.at("x"));
      const Eigen::Index offset = config.add_intercept ? 1 : 0;
      if (static_cast<Eigen::Index>(raw.size()) != p - offset) {
        throw ValidationError("query 'band': x needs " +
                              std::to_string(p - offset) +
                              " comma-separated values");
      }
      for (std::size_t k = 0; k < raw.size(); ++k) {
        x0[offset + static_cast<Eigen::Index>(k)] =
            parse_double(raw[k], "query 'band' x");
      }
    }

    std::vector<Eigen::VectorXd> curves;
    curves.reserve(store.draws.size());
    for (const MixtureParams& draw : store.draws) {
      Eigen::VectorXd curve(grid.size());
      for (Eigen::Index g = 0; g < grid.size(); ++g) {
        curve[g] = censored_density(grid[g], x0, lo, up, draw).continuous;
      }
      curves.push_back(std::move(curve));
    }
    const DensityBand band = density_band(curves, grid);
    const std::string path = joined(out, "band.csv");
    write_band_csv(path, band);
    notes.push_back("wrote " + path + ": " + std::to_string(points) +
                    " grid points, pointwise 5th/95th percentiles over " +
                    std::to_string(store.n_retained()) + " draws");
  } else {
    throw ValidationError("unknown query '" + kind +
                          "': expected ame, group-contrast, or band");
  }

  write_config(joined(out, "config.txt"), config, "summarize");
  return notes;
}

std::vector<std::string> cmd_replicate(const RunConfig& config) {
  if (!config.dataset.empty()) {
    throw ValidationError("replicate simulates its own data: unset dataset");
  }
  const std::vector<int> ids = config.dgp_list();
  const std::vector<int> counts = config.component_count_list();
  const ChainSettings settings = config.chain_settings();

  const std::vector<StudyCell> cells = replicate_study(
      ids, counts, config.replicates, config.n_obs, settings,
      config.parallelism);

  const std::filesystem::path out(config.out_dir);
  nlohmann::json summary = nlohmann::json::array();
  std::vector<std::string> notes;
  for (const StudyCell& cell : cells) {
    const std::filesystem::path cell_dir =
        out / ("dgp" + std::to_string(cell.dgp_id)) /
        ("C" + std::to_string(cell.n_components));
    write_band_csv((cell_dir / "band.csv").string(), cell.band);
    write_recovery_csv((cell_dir / "recovery.csv").string(), cell.recovery,
                       cell.n_components, cell.recovery.front().estimate.p());
    summary.push_back({{"dgp", cell.dgp_id},
                       {"components", cell.n_components},
                       {"replicates", config.replicates},
                       {"failures", cell.failures},
                       {"kept", config.replicates - cell.failures}});
    notes.push_back("process " + std::to_string(cell.dgp_id) + " with " +
                    std::to_string(cell.n_components) + " components: kept " +
                    std::to_string(config.replicates - cell.failures) +
                    " of " + std::to_string(config.replicates) +
                    " replicates under " + cell_dir.string());
  }
  {
    std::filesystem::create_directories(out);
    const std::string path = joined(out, "study.json");
    std::ofstream json_out(path);
    if (!json_out) {
      throw ValidationError("cannot open " + path + " for writing");
    }
    json_out << summary.dump(2) << '\n';
    json_out.flush();
    if (!json_out) {
      throw ValidationError("write to " + path + " failed");
    }
  }
  write_config(joined(out, "config.txt"), config, "replicate");
  return notes;
}

}  // namespace mixtobit
