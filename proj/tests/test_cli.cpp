#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cevt/app.hpp"
#include "cevt/config.hpp"
#include "cevt/errors.hpp"

using namespace cevt;
using Catch::Matchers::ContainsSubstring;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("cevt_test_" + name);
  std::ofstream(path) << content;
  return path;
}

std::string usage_message(const std::vector<std::string>& args) {
  try {
    parse_config(args);
  } catch (const UsageError& e) {
    return e.what();
  }
  return "no error";
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);)
    if (line.rfind("#", 0) != 0) out.push_back(line);
  return out;
}

int run_args(const std::vector<std::string>& args, std::string& out, std::string& err) {
  std::vector<const char*> argv{"cevt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), o, e);
  out = o.str();
  err = e.str();
  return code;
}

}  // namespace

TEST_CASE("simulate flags parse into a config", "[cli]") {
  const auto c = parse_config({"simulate", "--lifetime", "exp(rate=1)", "--censoring", "exp(rate=1)", "--n", "10000",
                               "--reps", "5000", "--seed", "42"});
  CHECK(c.command == Command::Simulate);
  CHECK(c.lifetime == "exp(rate=1)");
  CHECK(c.n == 10000);
  CHECK(c.reps == 5000);
  CHECK(c.seed == 42);
  CHECK(c.cure_fraction == 1.0);
}

TEST_CASE("usage errors name the offending flag or key", "[cli]") {
  CHECK_THAT(usage_message({"verify", "--lifetime", "weibull(shape=2,scale=1)", "--censoring",
                            "weibull(shape=3,scale=1)"}),
             ContainsSubstring("kappa = inf"));
  CHECK_THAT(usage_message({"simulate", "--lifetime", "exp(rate=1)", "--censoring", "exp(rate=1)",
                            "--cure-fraction", "1.2"}),
             ContainsSubstring("--cure-fraction"));
  CHECK_THAT(usage_message({"simulate", "--lifetime", "exp(rate=1)", "--censoring", "exp(rate=1)", "--bogus", "1"}),
             ContainsSubstring("--bogus"));
  CHECK_THAT(usage_message({"simulate", "--censoring", "exp(rate=1)"}), ContainsSubstring("--lifetime"));
  CHECK_THAT(usage_message({"limits", "--law", "q", "--grid", "1"}), ContainsSubstring("--law"));
  CHECK_THAT(usage_message({"limits", "--law", "r", "--grid", "0.1"}), ContainsSubstring("--kappa"));
  CHECK_THAT(usage_message({"test-cure", "--in", "x.csv"}), ContainsSubstring("--estimate-kappa"));
  CHECK_THAT(usage_message({"test-cure", "--in", "x.csv", "--kappa", "1", "--estimate-kappa"}),
             ContainsSubstring("exactly one"));
  CHECK_THAT(usage_message({"verify", "--preset", "nope"}), ContainsSubstring("nope"));
  CHECK_THAT(usage_message({"verify", "--preset", "kme-oracle", "--tolerance", "l-law-ks=0.1"}),
             ContainsSubstring("l-law-ks"));
  CHECK_THAT(usage_message({"verify", "--lifetime", "lognormal(sigma=1)", "--censoring", "exp(rate=1)"}),
             ContainsSubstring("kappa"));
  CHECK_THAT(usage_message({}), ContainsSubstring("subcommand"));
}

TEST_CASE("config file values are overridden by flags", "[cli]") {
  const auto path = temp_file("config.json", R"j({"lifetime": "exp(rate=1)", "censoring": "exp(rate=2)",
                                                 "n": 50, "reps": 7, "seed": 9})j");
  const auto c = parse_config({"simulate", "--config", path.string(), "--n", "60"});
  CHECK(c.n == 60);
  CHECK(c.reps == 7);
  CHECK(c.seed == 9);
  CHECK(c.censoring == "exp(rate=2)");

  const auto bad = temp_file("bad.json", R"j({"lifetime": "exp(rate=1)", "sede": 3})j");
  CHECK_THAT(usage_message({"simulate", "--config", bad.string()}), ContainsSubstring("sede"));
  const auto wrong = temp_file("wrong.json", R"j({"command": "limits"})j");
  CHECK_THAT(usage_message({"simulate", "--config", wrong.string()}), ContainsSubstring("command"));
}

TEST_CASE("config survives a JSON round trip", "[cli]") {
  auto c = parse_config({"verify", "--preset", "exp-kappa1", "--tolerance", "l-law-ks=0.07", "--seed", "5",
                         "--threads", "2"});
  CHECK(ExperimentConfig::from_json(c.to_json()) == c);
  CHECK(c.tolerances.at("l-law-ks") == 0.07);
}

TEST_CASE("grids", "[cli]") {
  const auto g = parse_grid("0.1:0.9:0.1");
  REQUIRE(g.size() == 9);
  CHECK(g[2] == 0.3);
  CHECK(g.back() == 0.9);
  CHECK(parse_grid("0,1,5") == std::vector<double>{0, 1, 5});
  CHECK_THROWS_AS(parse_grid("1:0:0.1"), UsageError);
  CHECK_THROWS_AS(parse_grid("a,b"), UsageError);
}

TEST_CASE("limits emits one row per grid point", "[cli]") {
  std::string out, err;
  CHECK(run_args({"limits", "--law", "r", "--kappa", "1", "--grid", "0.1:0.9:0.1"}, out, err) == 0);
  const auto lines = data_lines(out);
  REQUIRE(lines.size() == 10);
  CHECK(lines[0] == "kind,kappa,x_or_j,value");
  CHECK_THAT(lines[5], ContainsSubstring("r,1,0.5,0.5618177717731"));
  CHECK_THAT(out, ContainsSubstring("# cevt 0.1.0"));
  CHECK_THAT(out, ContainsSubstring("# seed: 42"));

  CHECK(run_args({"limits", "--law", "geom", "--kappa", "1", "--grid", "0,1,2"}, out, err) == 0);
  CHECK(data_lines(out)[2] == "geom,1,1,0.25");
  CHECK(run_args({"limits", "--law", "geom", "--kappa", "1", "--grid", "0.5"}, out, err) == 2);
}

TEST_CASE("kme reads a dataset and writes the step table", "[cli]") {
  const auto data = temp_file("kme.csv", "time,censored\n1,0\n2,0\n3,1\n");
  std::string out, err;
  REQUIRE(run_args({"kme", "--in", data.string()}, out, err) == 0);
  const auto lines = data_lines(out);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "field,time,value");
  CHECK(lines[1] == "survivor,1,0.66666666666666674");
  CHECK(lines[2] == "survivor,2,0.33333333333333337");
  CHECK(lines[3] == "level_stretch,NA,1");
  CHECK(lines[4] == "exceed_count,NA,1");
  CHECK(lines[5] == "plateau_level,NA,0.33333333333333337");

  const auto broken = temp_file("broken.csv", "time,censored\n1,2\n");
  CHECK(run_args({"kme", "--in", broken.string()}, out, err) == 2);
  CHECK_THAT(err, ContainsSubstring(":2:"));
}

TEST_CASE("test-cure reports its outcome", "[cli]") {
  const auto data = temp_file("cure.csv", "time,censored\n1,0\n4,0\n5,1\n");
  std::string out, err;
  REQUIRE(run_args({"test-cure", "--in", data.string(), "--alpha", "0.05", "--kappa", "0"}, out, err) == 0);
  const auto lines = data_lines(out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[1] == "single-sample,0.20000000000000001,0,0.050000000000000003,0,reject,true");
}

TEST_CASE("emitted files echo their config", "[cli]") {
  const auto path = std::filesystem::temp_directory_path() / "cevt_test_sim.csv";
  const auto json_path = std::filesystem::temp_directory_path() / "cevt_test_sim.json";
  std::string out, err;
  const std::vector<std::string> base{"simulate", "--lifetime", "weibull(shape=2,scale=1)", "--censoring",
                                      "exp(rate=1)", "--n", "200", "--reps", "20", "--seed", "3"};
  auto csv_args = base;
  csv_args.insert(csv_args.end(), {"--out", path.string()});
  REQUIRE(run_args(csv_args, out, err) == 0);
  CHECK(read_config_echo(path.string()) == parse_config(csv_args));

  auto json_args = base;
  json_args.insert(json_args.end(), {"--out", json_path.string(), "--format", "json"});
  REQUIRE(run_args(json_args, out, err) == 0);
  CHECK(read_config_echo(json_path.string()) == parse_config(json_args));
}

TEST_CASE("simulate output is identical across thread counts", "[cli]") {
  std::string one, four, err;
  const std::vector<std::string> args{"simulate", "--lifetime", "exp(rate=1)", "--censoring", "exp(rate=1)",
                                      "--cure-fraction", "0.7", "--n", "300", "--reps", "40", "--seed", "11"};
  auto a = args;
  a.insert(a.end(), {"--threads", "1"});
  auto b = args;
  b.insert(b.end(), {"--threads", "4"});
  REQUIRE(run_args(a, one, err) == 0);
  REQUIRE(run_args(b, four, err) == 0);
  CHECK(data_lines(one) == data_lines(four));
  CHECK(data_lines(one).size() == 41);
  CHECK(data_lines(one)[0] == "rep,M_u,M_c,M,N_u,N_c,N_c_exceed,norm_L,norm_R");
  // Improper lifetime: no norming, so norm_L is NA.
  CHECK_THAT(data_lines(one)[1], ContainsSubstring(",NA,"));
}

TEST_CASE("verify exit codes", "[cli]") {
  std::string out, err;
  CHECK(run_args({"verify", "--preset", "kme-oracle"}, out, err) == 0);
  CHECK(run_args({"verify", "--preset", "kme-oracle", "--tolerance", "kme-fixtures=-1"}, out, err) == 2);
  CHECK(run_args({"verify", "--preset", "poisson-mixture", "--tolerance", "poisson-mixture-identity=0"}, out, err) ==
        1);
  CHECK(run_args({"--help"}, out, err) == 0);
  CHECK_THAT(out, ContainsSubstring("simulate"));
}
