#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "recal/dataset_io.hpp"
#include "recal/errors.hpp"
#include "recal/random.hpp"

using namespace recal;
using Catch::Matchers::ContainsSubstring;

namespace {

Dataset parse(const std::string& text, DatasetFormat format, bool allow_missing = false) {
  std::istringstream in(text);
  return parse_dataset(in, format, "test.csv", allow_missing);
}

}  // namespace

TEST_CASE("members give sample mean and variance", "[dataset_io]") {
  const auto ds = parse("time,obs,e1,e2,e3\n1,2.5,1,2,3\n2,4,5,5,5\n", DatasetFormat::Members);
  REQUIRE(ds.size() == 2);
  CHECK(ds.means[0] == 2.0);
  CHECK(ds.variances[0] == 1.0);
  CHECK(ds.means[1] == 5.0);
  CHECK(ds.variances[1] == 0.0);
  CHECK(*ds.obs[0] == 2.5);

  const auto two = parse("time,obs,e1,e2\n0,0,5,5\n", DatasetFormat::Members);
  CHECK(two.means[0] == 5.0);
  CHECK(two.variances[0] == 0.0);
}

TEST_CASE("meanvar layout, comments and blank lines", "[dataset_io]") {
  const auto ds = parse("# produced upstream\n\ntime,obs,mean,var\n1990,0.5,0.25,1.5\n# gap\n1991, -1 ,0,0\n",
                        DatasetFormat::MeanVar);
  REQUIRE(ds.size() == 2);
  CHECK(ds.times[0] == "1990");
  CHECK(ds.means[0] == 0.25);
  CHECK(ds.variances[0] == 1.5);
  CHECK(*ds.obs[1] == -1.0);
  const auto train = ds.training();
  CHECK(train.size() == 2);
  CHECK(train[0].obs == 0.5);
}

TEST_CASE("ISO dates order rows", "[dataset_io]") {
  const auto ds = parse("time,obs,mean,var\n1997-12-01,1,1,1\n1998-01-01,1,1,1\n1998-01-02T12:00,1,1,1\n",
                        DatasetFormat::MeanVar);
  REQUIRE(ds.size() == 3);
  CHECK(ds.times[2] == "1998-01-02T12:00");
  // Timestamps are ordered by their date part.
  CHECK_THROWS_AS(parse("time,obs,mean,var\n1998-01-01,1,1,1\n1998-01-01T12:00,1,1,1\n", DatasetFormat::MeanVar),
                  InputError);
}

TEST_CASE("emit then parse round-trips bit for bit", "[dataset_io]") {
  RandomStream rng(42);
  std::normal_distribution<double> z;
  std::vector<ForecastRecord> rows;
  for (int i = 0; i < 200; ++i) rows.push_back({z(rng) * 1e3, std::abs(z(rng)) * 1e-7, z(rng) / 3.0});
  rows.push_back({std::numeric_limits<double>::denorm_min(), 0.0, -0.0});
  rows.push_back({std::numeric_limits<double>::max(), 1e300, std::numeric_limits<double>::lowest()});
  const auto original = Dataset::from_training(TrainingSet(rows));
  std::ostringstream out;
  emit_dataset(out, original);
  const auto back = parse(out.str(), DatasetFormat::MeanVar);
  REQUIRE(back.size() == original.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.times[i] == original.times[i]);
    CHECK(back.means[i] == original.means[i]);
    CHECK(back.variances[i] == original.variances[i]);
    CHECK(*back.obs[i] == *original.obs[i]);
    CHECK(std::signbit(*back.obs[i]) == std::signbit(*original.obs[i]));
  }
  std::ostringstream again;
  emit_dataset(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("missing observations", "[dataset_io]") {
  const std::string text = "time,obs,mean,var\n1,1,0,1\n2,NA,0.5,1\n3,,1,1\n4,nan,1,1\n";
  CHECK_THROWS_WITH(parse(text, DatasetFormat::MeanVar), ContainsSubstring("test.csv:3:"));
  const auto ds = parse(text, DatasetFormat::MeanVar, true);
  CHECK(ds.obs[0].has_value());
  CHECK_FALSE(ds.obs[1].has_value());
  CHECK_FALSE(ds.obs[2].has_value());
  CHECK_FALSE(ds.obs[3].has_value());
  CHECK_THROWS_AS(ds.training(), InputError);

  std::ostringstream out;
  emit_dataset(out, ds);
  CHECK_THAT(out.str(), ContainsSubstring("2,NA,0.5,1"));
}

TEST_CASE("malformed files report the line", "[dataset_io][errors]") {
  struct Case {
    std::string text;
    DatasetFormat format;
    std::string where;
  };
  const std::vector<Case> cases = {
      {"time,obs,e1\n1,1,1\n", DatasetFormat::Members, "test.csv:1:"},
      {"time,obs,mean\n1,1,1\n", DatasetFormat::MeanVar, "test.csv:1:"},
      {"time,obs,mean,var\n1,1,1,-0.5\n", DatasetFormat::MeanVar, "test.csv:2:"},
      {"time,obs,mean,var\n1,1,1,1\n1,1,1,1\n", DatasetFormat::MeanVar, "test.csv:3:"},
      {"time,obs,mean,var\n2,1,1,1\n1,1,1,1\n", DatasetFormat::MeanVar, "test.csv:3:"},
      {"time,obs,mean,var\n1,1,1,1\n\n2,1,x,1\n", DatasetFormat::MeanVar, "test.csv:4:"},
      {"time,obs,mean,var\n1,1,1\n", DatasetFormat::MeanVar, "test.csv:2:"},
      {"time,obs,mean,var\n1,1,1,1\n1990-01-01,1,1,1\n", DatasetFormat::MeanVar, "test.csv:3:"},
      {"time,obs,mean,var\n1990-02-30,1,1,1\n", DatasetFormat::MeanVar, "test.csv:2:"},
      {"time,obs,mean,var\nsoon,1,1,1\n", DatasetFormat::MeanVar, "test.csv:2:"},
      {"time,obs,mean,var\n1,inf,1,1\n", DatasetFormat::MeanVar, "test.csv:2:"},
      {"time,obs,e1,e2\n1,1,2,oops\n", DatasetFormat::Members, "test.csv:2:"},
  };
  for (const auto& c : cases) {
    INFO(c.text);
    CHECK_THROWS_AS(parse(c.text, c.format), InputError);
    CHECK_THROWS_WITH(parse(c.text, c.format), ContainsSubstring(c.where));
  }
  CHECK_THROWS_AS(parse("# only comments\n", DatasetFormat::MeanVar), InputError);
}

TEST_CASE("format names and missing files", "[dataset_io][errors]") {
  CHECK(parse_dataset_format("members") == DatasetFormat::Members);
  CHECK(parse_dataset_format("meanvar") == DatasetFormat::MeanVar);
  CHECK_THROWS_AS(parse_dataset_format("grib"), InputError);
  CHECK_THROWS_AS(ingest("/nonexistent/recal/data.csv", DatasetFormat::MeanVar), InputError);
}

TEST_CASE("format_number is the shortest round-trip form", "[dataset_io]") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-1.5e-300) == "-1.5e-300");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
