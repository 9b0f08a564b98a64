#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cli.hpp"
#include "unl/io.hpp"

namespace {

using namespace unl;
namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "unl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("unl_io_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Format, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 2.792}) {
    double back = 0.0;
    ASSERT_TRUE(parse_double(format_double(v), back));
    EXPECT_EQ(back, v);
  }
  double v = 0.0;
  EXPECT_TRUE(parse_double(" +1.5 ", v));
  EXPECT_EQ(v, 1.5);
  EXPECT_FALSE(parse_double("1.5x", v));
  EXPECT_FALSE(parse_double("", v));
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Csv, QuotesCommentsAndErrors) {
  std::istringstream in("# comment\nname,value\n\n\"a,b\",1\n\"say \"\"hi\"\"\",2\n");
  const auto t = read_csv(in);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "a,b");
  EXPECT_EQ(t.rows[1][0], "say \"hi\"");
  EXPECT_EQ(t.line_numbers[1], 5u);
  EXPECT_EQ(t.column("value"), 1u);
  EXPECT_THROW(t.column("missing"), std::runtime_error);
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  std::istringstream ragged("a,b\n1,2,3\n");
  EXPECT_THROW(read_csv(ragged), std::runtime_error);
}

TEST(Dataset, ReadSortsGroupsAndDetectsTypes) {
  std::istringstream in("group,y,age,site\nz,1.5,60,north\na,2.5,70,south\nz,0.5,65,north\n");
  DatasetSchema schema;
  schema.covariates = {"age", "site"};
  const auto groups = read_dataset(in, schema);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].label, "a");
  EXPECT_EQ(groups[1].outcomes, (std::vector<double>{1.5, 0.5}));
  EXPECT_TRUE(std::holds_alternative<std::vector<double>>(groups[1].covariates.at("age")));
  EXPECT_TRUE(std::holds_alternative<std::vector<std::string>>(groups[1].covariates.at("site")));

  std::ostringstream out;
  write_dataset(out, groups, schema);
  std::istringstream back(out.str());
  EXPECT_EQ(read_dataset(back, schema), groups);
}

TEST(Dataset, ErrorsNameLineAndColumn) {
  DatasetSchema schema;
  std::istringstream bad("group,y\na,1\na,oops\n");
  try {
    read_dataset(bad, schema);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'y'"), std::string::npos) << msg;
  }
  std::istringstream missing("group,outcome\na,1\n");
  EXPECT_THROW(read_dataset(missing, schema), std::runtime_error);
}

TEST(Draws, MixtureRoundTrip) {
  const std::vector<MixtureDraw> draws{{{0.25, 0.75}, {0.1, 1.0 / 3.0}, {1.0, 2.0}},
                                       {{0.5, 0.5}, {-1.0, 1e-300}, {0.5, 0.25}}};
  std::ostringstream out;
  write_mixture_draws(out, draws);
  std::istringstream in(out.str());
  EXPECT_EQ(read_mixture_draws(in), draws);
}

TEST(Draws, EnsembleRoundTrip) {
  ScalarEnsemble e{"x", {1.0, 2.5, 1.0 / 7.0}, 0};
  std::ostringstream out;
  write_ensemble(out, e);
  std::istringstream in(out.str());
  EXPECT_EQ(read_ensemble(in, "x").draws, e.draws);
}

TEST(RunConfig, ValidationNamesField) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  c.grid_points = 500;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.dpm[1].L = 1;
  try {
    c.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_EQ(std::string(e.what()).rfind("group 2: ", 0), 0u) << e.what();
  }
  c = RunConfig{};
  c.effect_specs[2] = "x:w=bspline(1),m=bspline(1)";
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.level = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Cli, MeasuresOnAnalyticDensities) {
  const auto r = cli({"measures", "--density", "normal:0,1", "--density", "normal:1,1", "--density", "normal:2,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  const auto t = read_csv(in);
  double unl_value = 0.0, vus = 0.0;
  for (const auto& row : t.rows) {
    if (row[0] == "UNL") parse_double(row[1], unl_value);
    if (row[0] == "VUS") parse_double(row[1], vus);
  }
  EXPECT_NEAR(unl_value, 2.0 * std_normal_cdf(0.5) * 2.0 - 1.0, 1e-9);
  EXPECT_NEAR(vus, 0.5361516341260808, 1e-8);
  EXPECT_EQ(r.out.rfind("# unl 0.1.0", 0), 0u);
}

TEST(Cli, RejectsUnknownFlagsAndBadInput) {
  EXPECT_NE(cli({"measures", "--density", "normal:0,1", "--bogus"}).code, 0);
  const auto bad = cli({"measures", "--density", "normal:0,-1", "--density", "normal:0,1", "--density", "normal:0,1"});
  EXPECT_NE(bad.code, 0);
  EXPECT_NE(bad.err.find("error"), std::string::npos);
  EXPECT_NE(cli({}).code, 0);
}

TEST(Cli, CompareEnsembles) {
  const auto dir = scratch("compare");
  {
    std::ofstream a(dir / "a.csv"), b(dir / "b.csv");
    write_ensemble(a, ScalarEnsemble{"a", {2.0, 3.0, 1.0, 5.0}, 0});
    write_ensemble(b, ScalarEnsemble{"b", {1.0, 3.5, 0.0, 4.0}, 0});
  }
  const auto r = cli({"compare", (dir / "a.csv").string(), (dir / "b.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find(",0.75\n"), std::string::npos) << r.out;
}

TEST(Cli, FitIsByteDeterministic) {
  const auto dir = scratch("fit");
  {
    std::ofstream data(dir / "data.csv");
    ScenarioSpec s;
    s.n = {40, 40, 40};
    const auto gen = generate(s, 0);
    write_dataset(data, std::vector<GroupDataset>(gen.begin(), gen.end()));
  }
  auto run = [&](const std::string& out) {
    return cli({"fit", "--data", (dir / "data.csv").string(), "--burn", "20", "--save", "40", "--seed", "9",
                "--grid-points", "201", "--out-dir", (dir / out).string()});
  };
  const auto r1 = run("a"), r2 = run("b");
  ASSERT_EQ(r1.code, 0) << r1.err;
  ASSERT_EQ(r2.code, 0) << r2.err;
  for (const char* f : {"unl_draws.csv", "yi3_draws.csv", "summary.csv", "draws_group1.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    EXPECT_FALSE(slurp(dir / "a" / f).empty()) << f;
  }
}

}  // namespace
