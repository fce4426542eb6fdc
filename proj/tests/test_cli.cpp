#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path kData = STOCHLYAP_DATA_DIR;

struct Result {
  int exit_code = -1;
  Json summary;
  std::string trace;
  std::string stderr_text;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stochlyap_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Result run_cli(const std::string& args, const fs::path& out) {
  const fs::path err = out / "stderr.txt";
  const std::string cmd =
      std::string("\"") + STOCHLYAP_CLI_PATH + "\" " + args + " --out \"" + out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stderr_text = slurp(err);
  if (fs::exists(out / "summary.json")) r.summary = Json::parse(slurp(out / "summary.json"));
  if (fs::exists(out / "trace.csv")) r.trace = slurp(out / "trace.csv");
  return r;
}

Result run_kind(const std::string& kind, const std::string& config, const std::string& name,
                const std::string& extra = "") {
  return run_cli("run " + kind + " --config \"" + (kData / config).string() + "\" " + extra, fresh_dir(name));
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

void expect_provenance(const Result& r, const std::string& kind) {
  EXPECT_EQ(r.summary.at("kind"), kind);
  EXPECT_TRUE(r.summary.at("seed").is_number_unsigned());
  EXPECT_EQ(r.summary.at("config_hash").get<std::string>().size(), 16u);
  EXPECT_EQ(r.summary.at("artifact_version"), "stochlyap-1.0.0");
  EXPECT_EQ(r.summary.at("exit_code"), r.exit_code);
}

}  // namespace

TEST(Cli, ClassifyReportsEachMatrix) {
  const auto r = run_kind("classify", "classify_switching.json", "classify");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  expect_provenance(r, "classify");
  const auto& m = r.summary.at("result").at("matrices");
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0].at("scrambling"), true);
  EXPECT_EQ(m[0].at("sia"), true);
  EXPECT_EQ(m[1].at("period"), 3);
  EXPECT_EQ(m[1].at("sia"), false);
  EXPECT_EQ(m[2].at("markov"), false);
  EXPECT_EQ(r.summary.at("seed"), 7);
  const auto rows = csv_rows(r.trace);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"label", "scrambling", "sia", "markov", "period", "tau"}));
  EXPECT_EQ(rows.size(), 4u);
  EXPECT_EQ(r.summary.at("result").at("windows").size(), 3u);
}

TEST(Cli, CertifySwitchingExample) {
  const auto r = run_kind("certify", "certify_switching.json", "certify");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  expect_provenance(r, "certify");
  const auto& c = r.summary.at("result").at("certificate");
  EXPECT_EQ(c.at("T"), 2);
  EXPECT_GE(c.at("alpha").get<double>(), 0.3 - 1e-9);
  EXPECT_EQ(c.at("supermartingale_ok"), true);
  const auto rows = csv_rows(r.trace);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "mean_v", "median_v", "q99_v"}));
  EXPECT_EQ(rows.size(), 122u);
}

TEST(Cli, ProductConvergesAndReportsTheBound) {
  const auto r = run_kind("product", "product_mixed.json", "product");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  expect_provenance(r, "product");
  const auto& res = r.summary.at("result");
  EXPECT_EQ(res.at("window_length").at("scrambling"), 1);
  EXPECT_DOUBLE_EQ(res.at("bound").at("p").get<double>(), 0.5);
  EXPECT_EQ(res.at("runs").size(), 4u);
  EXPECT_TRUE(res.contains("block_estimate"));
  EXPECT_EQ(csv_rows(r.trace)[0], (std::vector<std::string>{"run", "k", "tau", "spread"}));
}

TEST(Cli, ProductBudgetExhaustedExitsThree) {
  const auto r = run_kind("product", "product_identity.json", "product_identity");
  EXPECT_EQ(r.exit_code, 3);
  expect_provenance(r, "product");
  EXPECT_EQ(r.summary.at("result").at("converged"), false);
}

TEST(Cli, AsyncTraceHasNonIncreasingSpread) {
  const auto r = run_kind("async", "async_partition.json", "async");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  expect_provenance(r, "async");
  const auto& res = r.summary.at("result");
  EXPECT_EQ(res.at("rooted"), true);
  EXPECT_EQ(res.at("hierarchical_sequence"), Json::parse("[1, 0, 2, 5, 3, 4]"));
  EXPECT_EQ(res.at("hierarchical_product_markov"), true);
  EXPECT_EQ(res.at("agreement"), true);
  const auto rows = csv_rows(r.trace);
  ASSERT_EQ(rows[0], (std::vector<std::string>{"k", "spread"}));
  double previous = 1e300;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double s = std::stod(rows[i][1]);
    EXPECT_LE(s, previous);
    previous = s;
  }
  EXPECT_LT(previous, 1e-8);
}

TEST(Cli, LineqFindsTheIntersection) {
  const auto r = run_kind("lineq", "lineq_two_agent.json", "lineq");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  expect_provenance(r, "lineq");
  const auto& res = r.summary.at("result");
  EXPECT_EQ(res.at("converged"), true);
  EXPECT_NEAR(res.at("solution")[0].get<double>(), 1.0, 1e-8);
  EXPECT_NEAR(res.at("solution")[1].get<double>(), 1.0, 1e-8);
  EXPECT_DOUBLE_EQ(res.at("condition_a").get<double>(), 1.0);
  EXPECT_EQ(res.at("contracting_window").at("smallest"), 1);
  EXPECT_EQ(csv_rows(r.trace)[0], (std::vector<std::string>{"k", "disagreement", "residual", "feasibility"}));
}

TEST(Cli, LineqWithoutCommunicationExitsThree) {
  const auto r = run_kind("lineq", "lineq_isolated.json", "lineq_isolated");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(r.summary.at("result").at("converged"), false);
  EXPECT_EQ(r.summary.at("result").at("iters"), 200);
}

TEST(Cli, ValidationErrorsExitTwo) {
  const auto bad_matrix = run_kind("classify", "invalid_matrix.json", "bad_matrix");
  EXPECT_EQ(bad_matrix.exit_code, 2);
  EXPECT_NE(bad_matrix.stderr_text.find("RowSumViolation"), std::string::npos);
  EXPECT_NE(bad_matrix.stderr_text.find("invalid_matrix.json"), std::string::npos);

  EXPECT_EQ(run_kind("certify", "missing_field.json", "missing_field").exit_code, 2);
  EXPECT_EQ(run_kind("lineq", "missing_reference.json", "missing_reference").exit_code, 2);

  const auto truncated = run_kind("classify", "truncated.json", "truncated");
  EXPECT_EQ(truncated.exit_code, 2);
  EXPECT_NE(truncated.stderr_text.find("line 1"), std::string::npos);

  // Kind in the config disagrees with the requested kind.
  EXPECT_EQ(run_kind("product", "classify_switching.json", "kind_mismatch").exit_code, 2);
  EXPECT_EQ(run_cli("run nonsense --config x.json", fresh_dir("bad_kind")).exit_code, 2);
  EXPECT_EQ(run_cli("run classify", fresh_dir("no_config")).exit_code, 2);
  EXPECT_EQ(run_kind("classify", "no_such_config.json", "no_file").exit_code, 2);
}

TEST(Cli, ValidationFailureWritesNothing) {
  const auto r = run_kind("classify", "invalid_matrix.json", "nothing_written");
  EXPECT_TRUE(r.summary.is_null());
  EXPECT_TRUE(r.trace.empty());
}

TEST(Cli, RerunsAreByteIdentical) {
  for (const auto& [kind, config] : std::vector<std::pair<std::string, std::string>>{
           {"certify", "certify_switching.json"},
           {"product", "product_mixed.json"},
           {"async", "async_partition.json"},
           {"lineq", "lineq_two_agent.json"}}) {
    const fs::path a = fresh_dir(kind + "_a"), b = fresh_dir(kind + "_b");
    const std::string args = "run " + kind + " --config \"" + (kData / config).string() + "\"";
    run_cli(args, a);
    run_cli(args, b);
    EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json")) << kind;
    EXPECT_EQ(slurp(a / "trace.csv"), slurp(b / "trace.csv")) << kind;
    EXPECT_FALSE(fs::exists(a / "summary.json.tmp"));
  }
}

TEST(Cli, OverridesChangeSeedAndHash) {
  const auto base = run_kind("async", "async_partition.json", "override_base");
  const auto seeded = run_kind("async", "async_partition.json", "override_seed", "--seed 99");
  const auto stepped = run_kind("async", "async_partition.json", "override_steps", "--steps 50");
  EXPECT_EQ(seeded.summary.at("seed"), 99);
  EXPECT_NE(seeded.summary.at("config_hash"), base.summary.at("config_hash"));
  EXPECT_NE(seeded.trace, base.trace);
  EXPECT_EQ(stepped.summary.at("result").at("events"), 50);
  EXPECT_EQ(csv_rows(stepped.trace).size(), 52u);
  EXPECT_NE(stepped.summary.at("config_hash"), base.summary.at("config_hash"));
}

TEST(Cli, TrialsOverride) {
  const auto r = run_kind("product", "product_mixed.json", "override_trials", "--trials 2 --steps 500");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  EXPECT_EQ(r.summary.at("result").at("runs").size(), 2u);
}
