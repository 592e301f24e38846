#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "recal/training_set.hpp"

namespace recal {

enum class DatasetFormat {
  Members,  // time, obs, member_1, ..., member_M  (M >= 2)
  MeanVar,  // time, obs, mean, var
};

DatasetFormat parse_dataset_format(const std::string& name);

/// Rows of a dataset file in time order. Observations may be absent only in
/// rows that are to be forecast, never in training rows.
struct Dataset {
  std::vector<std::string> times;  // as written in the file
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<std::optional<double>> obs;

  std::size_t size() const noexcept { return times.size(); }

  /// Throws InputError naming the first row without an observation.
  TrainingSet training() const;

  static Dataset from_training(const TrainingSet& train);
};

/// Comma-separated, '#' comment lines and blank lines skipped, one header
/// row. Times are strictly increasing integers or ISO-8601 dates
/// (YYYY-MM-DD); they only label rows, the row position is the time index.
/// Ensemble members give m = sample mean and v = sample variance (n - 1).
/// Errors carry "source:line:" prefixes.
Dataset parse_dataset(std::istream& in, DatasetFormat format, const std::string& source,
                      bool allow_missing_obs = false);

Dataset ingest(const std::string& path, DatasetFormat format, bool allow_missing_obs = false);

/// Writes the (time, obs, mean, var) layout with shortest round-trip number
/// formatting, so parse_dataset reads back identical doubles.
void emit_dataset(std::ostream& out, const Dataset& data);

/// Shortest decimal representation that parses back to the same double.
std::string format_number(double x);

}  // namespace recal
