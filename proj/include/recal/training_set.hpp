#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace recal {

/// One forecast case: ensemble mean, ensemble variance, verifying observation.
struct ForecastRecord {
  double mean = 0.0;
  double variance = 0.0;
  double obs = 0.0;

  friend bool operator==(const ForecastRecord&, const ForecastRecord&) = default;
};

/// Ordered list of forecast cases. Construction checks that every value is
/// finite and every ensemble variance non-negative; fitting routines impose
/// their own minimum sizes.
class TrainingSet {
 public:
  TrainingSet() = default;
  explicit TrainingSet(std::vector<ForecastRecord> records);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const ForecastRecord& operator[](std::size_t i) const { return records_[i]; }
  std::span<const ForecastRecord> records() const noexcept { return records_; }

  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

  /// Records at the given positions, in the given order (duplicates allowed).
  TrainingSet select(std::span<const std::size_t> indices) const;

  std::size_t distinct_means() const;

  friend bool operator==(const TrainingSet&, const TrainingSet&) = default;

 private:
  std::vector<ForecastRecord> records_;
};

struct SummaryStats {
  std::size_t n = 0;
  double mean_m = 0.0;
  double mean_y = 0.0;
  double ss_m = 0.0;   // sum (m - mean_m)^2
  double ss_y = 0.0;   // sum (y - mean_y)^2
  double sp_my = 0.0;  // sum (m - mean_m)(y - mean_y)
};

/// Two-pass centred sums over the training set.
SummaryStats summarize(const TrainingSet& train);

}  // namespace recal
