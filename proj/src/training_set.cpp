#include "recal/training_set.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recal/errors.hpp"

namespace recal {

TrainingSet::TrainingSet(std::vector<ForecastRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!std::isfinite(r.mean) || !std::isfinite(r.variance) || !std::isfinite(r.obs)) {
      throw InputError("record " + std::to_string(i) + " has a non-finite value");
    }
    if (r.variance < 0.0) {
      throw InputError("record " + std::to_string(i) + " has negative ensemble variance");
    }
  }
}

TrainingSet TrainingSet::select(std::span<const std::size_t> indices) const {
  std::vector<ForecastRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(records_.at(i));
  TrainingSet result;
  result.records_ = std::move(out);
  return result;
}

std::size_t TrainingSet::distinct_means() const {
  std::vector<double> m;
  m.reserve(records_.size());
  for (const auto& r : records_) m.push_back(r.mean);
  std::sort(m.begin(), m.end());
  return static_cast<std::size_t>(std::unique(m.begin(), m.end()) - m.begin());
}

SummaryStats summarize(const TrainingSet& train) {
  SummaryStats s;
  s.n = train.size();
  if (s.n == 0) return s;
  for (const auto& r : train) {
    s.mean_m += r.mean;
    s.mean_y += r.obs;
  }
  s.mean_m /= static_cast<double>(s.n);
  s.mean_y /= static_cast<double>(s.n);
  for (const auto& r : train) {
    const double dm = r.mean - s.mean_m;
    const double dy = r.obs - s.mean_y;
    s.ss_m += dm * dm;
    s.ss_y += dy * dy;
    s.sp_my += dm * dy;
  }
  return s;
}

}  // namespace recal
