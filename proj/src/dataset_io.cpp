#include "recal/dataset_io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "recal/errors.hpp"

namespace recal {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_missing(std::string_view s) {
  return s.empty() || s == "NA" || s == "na" || s == "nan" || s == "NaN";
}

enum class TimeKind { Integer, Date };

// Integer times map to themselves, dates to days since 1970-01-01.
std::optional<long long> parse_time(std::string_view s, TimeKind& kind, bool first) {
  long long v = 0;
  if (auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      ec == std::errc{} && ptr == s.data() + s.size()) {
    if (!first && kind != TimeKind::Integer) return std::nullopt;
    kind = TimeKind::Integer;
    return v;
  }
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  // Accept a full ISO-8601 timestamp but order by its date part.
  if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  const char* b = s.data();
  if (std::from_chars(b, b + 4, y).ptr != b + 4 || std::from_chars(b + 5, b + 7, m).ptr != b + 7 ||
      std::from_chars(b + 8, b + 10, d).ptr != b + 10) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  if (!first && kind != TimeKind::Date) return std::nullopt;
  kind = TimeKind::Date;
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

}  // namespace

DatasetFormat parse_dataset_format(const std::string& name) {
  if (name == "members") return DatasetFormat::Members;
  if (name == "meanvar") return DatasetFormat::MeanVar;
  throw InputError("unknown dataset format '" + name + "' (expected members or meanvar)");
}

TrainingSet Dataset::training() const {
  std::vector<ForecastRecord> rows;
  rows.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (!obs[i]) throw InputError("row " + std::to_string(i) + " (time " + times[i] + ") has no observation");
    rows.push_back({means[i], variances[i], *obs[i]});
  }
  return TrainingSet(std::move(rows));
}

Dataset Dataset::from_training(const TrainingSet& train) {
  Dataset d;
  for (std::size_t i = 0; i < train.size(); ++i) {
    d.times.push_back(std::to_string(i));
    d.means.push_back(train[i].mean);
    d.variances.push_back(train[i].variance);
    d.obs.emplace_back(train[i].obs);
  }
  return d;
}

Dataset parse_dataset(std::istream& in, DatasetFormat format, const std::string& source,
                      bool allow_missing_obs) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool have_header = false;
  TimeKind kind = TimeKind::Integer;
  std::optional<long long> last_time;

  auto fail = [&](const std::string& msg) -> InputError {
    return InputError(source + ":" + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split_fields(view);

    if (!have_header) {
      columns = fields.size();
      if (format == DatasetFormat::MeanVar && columns != 4) {
        throw fail("meanvar header needs 4 columns (time, obs, mean, var), found " + std::to_string(columns));
      }
      if (format == DatasetFormat::Members && columns < 4) {
        throw fail("members header needs time, obs and at least 2 member columns");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != columns) {
      throw fail("expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()));
    }

    const auto t = parse_time(fields[0], kind, !last_time.has_value());
    if (!t) throw fail("unparseable or inconsistent time '" + std::string(fields[0]) + "'");
    if (last_time && *t <= *last_time) throw fail("time is not strictly increasing");
    last_time = t;

    std::optional<double> obs;
    if (is_missing(fields[1])) {
      if (!allow_missing_obs) throw fail("missing observation in a training row");
    } else {
      obs = parse_double(fields[1]);
      if (!obs) throw fail("unparseable observation '" + std::string(fields[1]) + "'");
    }

    double m = 0.0, v = 0.0;
    if (format == DatasetFormat::MeanVar) {
      const auto pm = parse_double(fields[2]);
      const auto pv = parse_double(fields[3]);
      if (!pm) throw fail("unparseable ensemble mean '" + std::string(fields[2]) + "'");
      if (!pv) throw fail("unparseable ensemble variance '" + std::string(fields[3]) + "'");
      if (*pv < 0.0) throw fail("negative ensemble variance");
      m = *pm;
      v = *pv;
    } else {
      std::vector<double> members;
      for (std::size_t k = 2; k < fields.size(); ++k) {
        const auto x = parse_double(fields[k]);
        if (!x) throw fail("unparseable ensemble member '" + std::string(fields[k]) + "'");
        members.push_back(*x);
      }
      for (double x : members) m += x;
      m /= static_cast<double>(members.size());
      for (double x : members) v += (x - m) * (x - m);
      v /= static_cast<double>(members.size() - 1);
    }

    data.times.emplace_back(fields[0]);
    data.means.push_back(m);
    data.variances.push_back(v);
    data.obs.push_back(obs);
  }
  if (!have_header) throw InputError(source + ": no header row");
  return data;
}

Dataset ingest(const std::string& path, DatasetFormat format, bool allow_missing_obs) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file '" + path + "'");
  return parse_dataset(in, format, path, allow_missing_obs);
}

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void emit_dataset(std::ostream& out, const Dataset& data) {
  out << "time,obs,mean,var\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.times[i] << ',' << (data.obs[i] ? format_number(*data.obs[i]) : std::string("NA")) << ','
        << format_number(data.means[i]) << ',' << format_number(data.variances[i]) << '\n';
  }
}

}  // namespace recal
