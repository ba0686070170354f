#ifndef MIXTOBIT_IO_HPP_
#define MIXTOBIT_IO_HPP_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixtobit/data.hpp"
#include "mixtobit/gibbs.hpp"
#include "mixtobit/posterior.hpp"
#include "mixtobit/simulate.hpp"

namespace mixtobit {

// Shortest decimal string that parses back to the same double. Infinities
// come out as "inf"/"-inf" and read back in.
std::string format_double(double value);

// Strict full-cell parse. context is prepended to the error message.
double parse_double(const std::string& cell, const std::string& context);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header name, -1 when absent. Duplicated names throw.
  int column(const std::string& name) const;
};

// Plain comma-separated text: header line plus rectangular data lines, no
// quoting, cells trimmed of surrounding whitespace.
CsvTable read_csv(const std::string& path);

struct DatasetSchema {
  std::string outcome = "y";
  std::vector<std::string> covariates;
  std::string lower_column;  // empty: use the global bound below
  std::string upper_column;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool add_intercept = true;
};

struct IngestResult {
  ObservationSet data;
  int dropped_rows = 0;  // rows lost to missing cells in used columns
};

// Empty cells and "NA"/"nan" (any case) in used columns drop the row.
// Anything else non-numeric is an error naming the line and column.
IngestResult ingest_csv(const std::string& path, const DatasetSchema& schema);

// Columns y, lower, upper, x1..xp; optional trailing 1-based class column.
// ingest_csv with covariates x1..xp and add_intercept = false restores the
// ObservationSet exactly.
void write_dataset_csv(const std::string& path, const ObservationSet& data,
                       const Eigen::VectorXi* classes = nullptr);

// FNV-1a over the raw file bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

// "default" or "least-squares", the spelling used in metadata and configs.
std::string init_scheme_name(InitScheme init);
InitScheme init_scheme_from_name(const std::string& name);

// Column names for one parameter draw: beta{c}_{j} and sigma2_{c} for each
// class, then weight_{c}. Shared by the draw and recovery tables.
std::vector<std::string> param_header(int n_components, Eigen::Index p);
std::vector<double> param_row(const MixtureParams& params);
MixtureParams params_from_row(const std::vector<double>& row, int n_components,
                              Eigen::Index p);

// dir/draws.csv, dir/loglik.csv, dir/meta.json. data_digest ties the store
// to the dataset file it was fit on.
void write_draw_store(const std::string& dir, const DrawStore& store,
                      const std::string& data_digest);

struct StoredChain {
  DrawStore store;
  std::string data_digest;
};

StoredChain load_draw_store(const std::string& dir);

void write_band_csv(const std::string& path, const DensityBand& band);
void write_recovery_csv(const std::string& path,
                        const std::vector<RecoveryRow>& rows, int n_components,
                        Eigen::Index p);

// Two columns: a 0-based index and the named value column.
void write_series_csv(const std::string& path, const std::string& index_name,
                      const std::string& value_name,
                      const Eigen::VectorXd& values);

}  // namespace mixtobit

#endif  // MIXTOBIT_IO_HPP_
