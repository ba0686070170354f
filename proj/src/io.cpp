#include "mixtobit/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "mixtobit/errors.hpp"

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

std::string lower_copy(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool is_missing_cell(const std::string& cell) {
  const std::string low = lower_copy(cell);
  return low.empty() || low == "na" || low == "nan";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  while (true) {
    const std::string::size_type comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::ofstream open_for_write(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) {
      throw ValidationError("cannot create directory " +
                            p.parent_path().string() + ": " + ec.message());
    }
  }
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot open " + path + " for writing");
  }
  return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) {
    throw ValidationError("write to " + path + " failed");
  }
}

void write_row(std::ofstream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) {
      out << ',';
    }
    out << cells[i];
  }
  out << '\n';
}

constexpr const char* kStoreFormat = "mixtobit-draws-v1";

}  // namespace

std::string init_scheme_name(InitScheme init) {
  return init == InitScheme::kLeastSquaresPerturb ? "least-squares" : "default";
}

InitScheme init_scheme_from_name(const std::string& name) {
  if (name == "least-squares") {
    return InitScheme::kLeastSquaresPerturb;
  }
  if (name == "default") {
    return InitScheme::kDefault;
  }
  throw ValidationError("unknown init scheme '" + name + "'");
}

std::string format_double(double value) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, const std::string& context) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const std::from_chars_result res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || cell.empty()) {
    throw ValidationError(context + ": cannot parse '" + cell + "' as a number");
  }
  return value;
}

int CsvTable::column(const std::string& name) const {
  int found = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      if (found >= 0) {
        throw ValidationError("column '" + name + "' appears more than once");
      }
      found = static_cast<int>(i);
    }
  }
  return found;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open " + path);
  }
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line_no == 1) {
      table.header = split_line(line);
      continue;
    }
    if (trim(line).empty()) {
      continue;
    }
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw ValidationError(path + " line " + std::to_string(line_no) + ": " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) {
    throw ValidationError(path + ": empty file, expected a header row");
  }
  return table;
}

IngestResult ingest_csv(const std::string& path, const DatasetSchema& schema) {
  if (schema.outcome.empty()) {
    throw ValidationError("ingest: no outcome column named");
  }
  if (!schema.add_intercept && schema.covariates.empty()) {
    throw ValidationError("ingest: no covariates and no intercept requested");
  }
  const CsvTable table = read_csv(path);

  const auto require_column = [&](const std::string& name) {
    const int idx = table.column(name);
    if (idx < 0) {
      throw ValidationError(path + ": column '" + name + "' not found");
    }
    return idx;
  };

  const int y_col = require_column(schema.outcome);
  std::vector<int> x_cols;
  x_cols.reserve(schema.covariates.size());
  for (const std::string& name : schema.covariates) {
    x_cols.push_back(require_column(name));
  }
  const int lower_col =
      schema.lower_column.empty() ? -1 : require_column(schema.lower_column);
  const int upper_col =
      schema.upper_column.empty() ? -1 : require_column(schema.upper_column);

  std::vector<int> used_cols = x_cols;
  used_cols.push_back(y_col);
  if (lower_col >= 0) {
    used_cols.push_back(lower_col);
  }
  if (upper_col >= 0) {
    used_cols.push_back(upper_col);
  }

  const Eigen::Index p =
      static_cast<Eigen::Index>(schema.covariates.size()) +
      (schema.add_intercept ? 1 : 0);

  std::vector<double> y_kept;
  std::vector<double> lower_kept;
  std::vector<double> upper_kept;
  std::vector<double> x_kept;  // row major, p per row
  int dropped = 0;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::vector<std::string>& row = table.rows[r];
    const int line_no = static_cast<int>(r) + 2;
    const bool missing =
        std::any_of(used_cols.begin(), used_cols.end(),
                    [&](int c) { return is_missing_cell(row[c]); });
    if (missing) {
      ++dropped;
      continue;
    }
    const auto cell_context = [&](int c) {
      return path + " line " + std::to_string(line_no) + ", column '" +
             table.header[c] + "'";
    };
    const double y = parse_double(row[y_col], cell_context(y_col));
    const double lo = lower_col >= 0
                          ? parse_double(row[lower_col], cell_context(lower_col))
                          : schema.lower;
    const double up = upper_col >= 0
                          ? parse_double(row[upper_col], cell_context(upper_col))
                          : schema.upper;
    if (std::isnan(lo) || std::isnan(up) || !(lo < up)) {
      throw ValidationError(path + " line " + std::to_string(line_no) +
                            ": censoring bounds [" + format_double(lo) + ", " +
                            format_double(up) + "] are not an interval");
    }
    if (std::isnan(y) || y < lo || y > up) {
      throw ValidationError(path + " line " + std::to_string(line_no) +
                            ": outcome " + format_double(y) +
                            " outside censoring bounds [" + format_double(lo) +
                            ", " + format_double(up) + "]");
    }
    y_kept.push_back(y);
    lower_kept.push_back(lo);
    upper_kept.push_back(up);
    if (schema.add_intercept) {
      x_kept.push_back(1.0);
    }
    for (int c : x_cols) {
      x_kept.push_back(parse_double(row[c], cell_context(c)));
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(y_kept.size());
  if (n == 0) {
    throw ValidationError(path + ": no usable rows after dropping " +
                          std::to_string(dropped) + " with missing values");
  }

  IngestResult result;
  result.dropped_rows = dropped;
  result.data.y = Eigen::Map<const Eigen::VectorXd>(y_kept.data(), n);
  result.data.lower = Eigen::Map<const Eigen::VectorXd>(lower_kept.data(), n);
  result.data.upper = Eigen::Map<const Eigen::VectorXd>(upper_kept.data(), n);
  result.data.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                 Eigen::Dynamic, Eigen::RowMajor>>(
      x_kept.data(), n, p);
  result.data.validate();
  return result;
}

void write_dataset_csv(const std::string& path, const ObservationSet& data,
                       const Eigen::VectorXi* classes) {
  data.validate();
  if (classes != nullptr && classes->size() != data.n()) {
    throw ValidationError("class labels do not match the number of rows");
  }
  std::ofstream out = open_for_write(path);
  std::vector<std::string> cells;
  cells.emplace_back("y");
  cells.emplace_back("lower");
  cells.emplace_back("upper");
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    cells.push_back("x" + std::to_string(j + 1));
  }
  if (classes != nullptr) {
    cells.emplace_back("class");
  }
  write_row(out, cells);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    cells.clear();
    cells.push_back(format_double(data.y[i]));
    cells.push_back(format_double(data.lower[i]));
    cells.push_back(format_double(data.upper[i]));
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      cells.push_back(format_double(data.X(i, j)));
    }
    if (classes != nullptr) {
      cells.push_back(std::to_string((*classes)[i]));
    }
    write_row(out, cells);
  }
  finish_write(out, path);
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open " + path);
  }
  std::uint64_t hash = 14695981039346656037ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
    if (!in) {
      break;
    }
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << hash;
  return hex.str();
}

std::vector<std::string> param_header(int n_components, Eigen::Index p) {
  std::vector<std::string> names;
  for (int c = 0; c < n_components; ++c) {
    for (Eigen::Index j = 0; j < p; ++j) {
      names.push_back("beta" + std::to_string(c + 1) + "_" +
                      std::to_string(j + 1));
    }
    names.push_back("sigma2_" + std::to_string(c + 1));
  }
  for (int c = 0; c < n_components; ++c) {
    names.push_back("weight_" + std::to_string(c + 1));
  }
  return names;
}

std::vector<double> param_row(const MixtureParams& params) {
  std::vector<double> values;
  for (const ComponentParams& comp : params.components) {
    for (Eigen::Index j = 0; j < comp.beta.size(); ++j) {
      values.push_back(comp.beta[j]);
    }
    values.push_back(comp.sigma2);
  }
  for (Eigen::Index c = 0; c < params.weights.size(); ++c) {
    values.push_back(params.weights[c]);
  }
  return values;
}

MixtureParams params_from_row(const std::vector<double>& row, int n_components,
                              Eigen::Index p) {
  const std::size_t expected =
      static_cast<std::size_t>(n_components) * (static_cast<std::size_t>(p) + 2);
  if (row.size() != expected) {
    throw ValidationError("parameter row has " + std::to_string(row.size()) +
                          " values, expected " + std::to_string(expected));
  }
  MixtureParams params;
  params.components.resize(n_components);
  params.weights.resize(n_components);
  std::size_t k = 0;
  for (int c = 0; c < n_components; ++c) {
    params.components[c].beta.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      params.components[c].beta[j] = row[k++];
    }
    params.components[c].sigma2 = row[k++];
  }
  for (int c = 0; c < n_components; ++c) {
    params.weights[c] = row[k++];
  }
  return params;
}

void write_draw_store(const std::string& dir, const DrawStore& store,
                      const std::string& data_digest) {
  if (store.n_retained() == 0) {
    throw ValidationError("draw store is empty");
  }
  const int C = store.settings.n_components;
  const Eigen::Index p = store.draws.front().p();
  const std::filesystem::path base(dir);

  {
    std::ofstream out = open_for_write((base / "draws.csv").string());
    std::vector<std::string> cells = param_header(C, p);
    write_row(out, cells);
    for (const MixtureParams& draw : store.draws) {
      const std::vector<double> values = param_row(draw);
      cells.clear();
      for (double v : values) {
        cells.push_back(format_double(v));
      }
      write_row(out, cells);
    }
    finish_write(out, (base / "draws.csv").string());
  }

  {
    std::ofstream out = open_for_write((base / "loglik.csv").string());
    std::vector<std::string> cells;
    for (Eigen::Index i = 0; i < store.n_obs(); ++i) {
      cells.push_back("obs_" + std::to_string(i + 1));
    }
    write_row(out, cells);
    for (int s = 0; s < store.n_retained(); ++s) {
      cells.clear();
      for (Eigen::Index i = 0; i < store.n_obs(); ++i) {
        cells.push_back(format_double(store.pointwise(s, i)));
      }
      write_row(out, cells);
    }
    finish_write(out, (base / "loglik.csv").string());
  }

  {
    nlohmann::json meta;
    meta["format"] = kStoreFormat;
    meta["n_components"] = C;
    meta["p"] = p;
    meta["n_draws"] = store.settings.n_draws;
    meta["burn_in"] = store.settings.burn_in;
    meta["thin"] = store.settings.thin;
    meta["seed"] = store.seed;
    meta["init"] = init_scheme_name(store.settings.init);
    meta["n_retained"] = store.n_retained();
    meta["n_obs"] = store.n_obs();
    meta["data_digest"] = data_digest;
    nlohmann::json notes = nlohmann::json::array();
    for (const CollapseNote& note : store.collapse_notes) {
      notes.push_back({{"component", note.component},
                       {"iteration", note.iteration}});
    }
    meta["collapse_notes"] = notes;
    std::ofstream out = open_for_write((base / "meta.json").string());
    out << meta.dump(2) << '\n';
    finish_write(out, (base / "meta.json").string());
  }
}

StoredChain load_draw_store(const std::string& dir) {
  const std::filesystem::path base(dir);
  const std::string meta_path = (base / "meta.json").string();
  std::ifstream meta_in(meta_path);
  if (!meta_in) {
    throw ValidationError("cannot open " + meta_path);
  }
  nlohmann::json meta;
  try {
    meta_in >> meta;
    if (meta.value("format", "") != kStoreFormat) {
      throw ValidationError(meta_path + ": not a draw store (format '" +
                            meta.value("format", "") + "')");
    }
    StoredChain loaded;
    DrawStore& store = loaded.store;
    store.settings.n_components = meta.at("n_components").get<int>();
    store.settings.n_draws = meta.at("n_draws").get<int>();
    store.settings.burn_in = meta.at("burn_in").get<int>();
    store.settings.thin = meta.at("thin").get<int>();
    store.settings.seed = meta.at("seed").get<std::uint64_t>();
    store.settings.init = init_scheme_from_name(meta.at("init").get<std::string>());
    store.seed = store.settings.seed;
    loaded.data_digest = meta.at("data_digest").get<std::string>();
    for (const nlohmann::json& note : meta.at("collapse_notes")) {
      store.collapse_notes.push_back(CollapseNote{
          note.at("component").get<int>(), note.at("iteration").get<int>()});
    }

    const int C = store.settings.n_components;
    const Eigen::Index p = meta.at("p").get<Eigen::Index>();
    const int n_retained = meta.at("n_retained").get<int>();
    const Eigen::Index n_obs = meta.at("n_obs").get<Eigen::Index>();
    if (C < 1 || p < 1 || n_retained < 1 || n_obs < 1) {
      throw ValidationError(meta_path + ": non-positive dimensions");
    }

    const std::string draws_path = (base / "draws.csv").string();
    const CsvTable draws = read_csv(draws_path);
    const std::vector<std::string> expected = param_header(C, p);
    if (draws.header != expected) {
      throw ValidationError(draws_path + ": header does not match a " +
                            std::to_string(C) + "-component draw table");
    }
    if (static_cast<int>(draws.rows.size()) != n_retained) {
      throw ValidationError(draws_path + ": " +
                            std::to_string(draws.rows.size()) +
                            " draws, metadata says " +
                            std::to_string(n_retained));
    }
    store.draws.reserve(draws.rows.size());
    std::vector<double> values(expected.size());
    for (std::size_t s = 0; s < draws.rows.size(); ++s) {
      for (std::size_t k = 0; k < expected.size(); ++k) {
        values[k] = parse_double(draws.rows[s][k],
                                 draws_path + " line " + std::to_string(s + 2) +
                                     ", column '" + expected[k] + "'");
      }
      store.draws.push_back(params_from_row(values, C, p));
      store.draws.back().validate(p);
    }

    const std::string loglik_path = (base / "loglik.csv").string();
    const CsvTable loglik = read_csv(loglik_path);
    if (static_cast<Eigen::Index>(loglik.header.size()) != n_obs ||
        static_cast<int>(loglik.rows.size()) != n_retained) {
      throw ValidationError(loglik_path + ": expected " +
                            std::to_string(n_retained) + " x " +
                            std::to_string(n_obs) + " log likelihood table");
    }
    store.pointwise.resize(n_retained, n_obs);
    for (int s = 0; s < n_retained; ++s) {
      for (Eigen::Index i = 0; i < n_obs; ++i) {
        store.pointwise(s, i) = parse_double(
            loglik.rows[s][i], loglik_path + " line " + std::to_string(s + 2) +
                                   ", column " + std::to_string(i + 1));
      }
    }
    return loaded;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(meta_path + ": " + e.what());
  }
}

void write_band_csv(const std::string& path, const DensityBand& band) {
  std::ofstream out = open_for_write(path);
  write_row(out, {"grid", "mean", "q05", "q95"});
  for (Eigen::Index g = 0; g < band.grid.size(); ++g) {
    write_row(out, {format_double(band.grid[g]), format_double(band.mean_curve[g]),
                    format_double(band.q05_curve[g]),
                    format_double(band.q95_curve[g])});
  }
  finish_write(out, path);
}

void write_recovery_csv(const std::string& path,
                        const std::vector<RecoveryRow>& rows, int n_components,
                        Eigen::Index p) {
  std::ofstream out = open_for_write(path);
  std::vector<std::string> cells;
  cells.emplace_back("replicate");
  for (const std::string& name : param_header(n_components, p)) {
    cells.push_back(name);
  }
  write_row(out, cells);
  for (const RecoveryRow& row : rows) {
    cells.clear();
    cells.push_back(std::to_string(row.replicate));
    for (double v : param_row(row.estimate)) {
      cells.push_back(format_double(v));
    }
    write_row(out, cells);
  }
  finish_write(out, path);
}

void write_series_csv(const std::string& path, const std::string& index_name,
                      const std::string& value_name,
                      const Eigen::VectorXd& values) {
  std::ofstream out = open_for_write(path);
  write_row(out, {index_name, value_name});
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    write_row(out, {std::to_string(i), format_double(values[i])});
  }
  finish_write(out, path);
}

}  // namespace mixtobit
