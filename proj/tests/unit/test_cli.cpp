#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cptrie/cli.hpp"
#include "cptrie/dist_io.hpp"
#include "test_support.hpp"

namespace cptrie {
namespace {

namespace fs = std::filesystem;
using testing::data_path;
using testing::slurp;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cptrie");
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::scratch_dir("cli");
    trie_ = (dir_ / "trie.json").string();
    nodes_ = (dir_ / "nodes.jsonl").string();
    dists_ = (dir_ / "dists.jsonl").string();
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun build() {
    return cli({"build-trie", "--input", data_path("corpus").string(), "--wordlist", data_path("wordlist.txt").string(),
                "--out", trie_});
  }
  void pipeline() {
    ASSERT_EQ(build().code, 0);
    ASSERT_EQ(cli({"select-nodes", "--trie", trie_, "--out", nodes_}).code, 0);
    ASSERT_EQ(cli({"export-toy", "--trie", trie_, "--nodes", nodes_, "--out", dists_}).code, 0);
  }
  std::vector<std::string> inputs() const { return {"--trie", trie_, "--nodes", nodes_, "--dists", dists_}; }
  CliRun with_inputs(std::vector<std::string> head, const std::vector<std::string>& tail) {
    const auto in = inputs();
    head.insert(head.end(), in.begin(), in.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return cli(head);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::string trie_, nodes_, dists_;
};

TEST_F(CliTest, BuildTriePrintsStatsAndIsByteStable) {
  const CliRun first = build();
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_EQ(first.out, "{\"articles\":4,\"leaves\":93,\"distinct_terminals\":92,\"max_depth\":12,\"root_branching\":15}\n");
  const std::string bytes = slurp(trie_);
  ASSERT_EQ(build().code, 0);
  EXPECT_EQ(slurp(trie_), bytes);
  EXPECT_EQ(bytes, serialize(testing::build_fixture().trie));

  const auto manifest = nlohmann::json::parse(slurp(trie_ + ".manifest.json"));
  EXPECT_EQ(manifest.at("command"), "build-trie");
  EXPECT_EQ(manifest.at("inputs").size(), 4u);
  EXPECT_EQ(manifest.at("tool_version"), CPTRIE_VERSION);
  EXPECT_EQ(manifest.at("config_hash").get<std::string>().size(), 16u);
  EXPECT_TRUE(manifest.contains("duration_ms"));
  EXPECT_NE(manifest.at("warnings").dump().find("unknown_word 7"), std::string::npos);
}

TEST_F(CliTest, BuildTrieManifestModeAndConfig) {
  std::ofstream(path("docs.txt")) << "The film was shot in the city.\nIt was small.\n";
  std::ofstream(path("ingest.conf")) << "heading_max_units = 2\n";
  const CliRun r = cli({"build-trie", "--manifest", "--input", path("docs.txt"), "--wordlist",
                     data_path("wordlist.txt").string(), "--config", path("ingest.conf"), "--out", trie_});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"articles\":2"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\"leaves\":2"), std::string::npos);
}

TEST_F(CliTest, EmptyCorpusIsDataError) {
  std::ofstream(path("bad.txt")) << "Zyxzyq ran away.\n";
  const CliRun r = cli({"build-trie", "--input", path("bad.txt"), "--wordlist", data_path("wordlist.txt").string(),
                     "--out", trie_});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("EmptyCorpus"), std::string::npos) << r.err;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  ASSERT_EQ(build().code, 0);
  EXPECT_EQ(cli({"select-nodes", "--trie", trie_, "--roots", "0", "--out", nodes_}).code, kExitUsage);
  EXPECT_EQ(cli({"select-nodes", "--trie", path("missing.json"), "--out", nodes_}).code, kExitUsage);
}

TEST_F(CliTest, SelectNodesDepthOne) {
  ASSERT_EQ(build().code, 0);
  ASSERT_EQ(cli({"select-nodes", "--trie", trie_, "--max-depth", "1", "--out", nodes_}).code, 0);
  const auto nodes = load_nodes(nodes_);
  EXPECT_EQ(nodes.size(), 10u);
}

TEST_F(CliTest, EvaluateTopKOne) {
  pipeline();
  const CliRun r = with_inputs({"evaluate", "--method", "top_k", "--param", "1"}, {"--out", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(path("r.json")));
  const auto summary = nlohmann::json::parse(slurp(testing::oracle_path("fixture_summary.json")));
  EXPECT_NEAR(report.at("average_recall").get<double>(), summary.at("ar_top_k_1").get<double>(), 1e-12);
  EXPECT_EQ(report.at("average_risk").get<double>(), 0.0);
  EXPECT_EQ(report.at("n_nodes").get<std::size_t>(), summary.at("default_selection_nodes").get<std::size_t>());
  EXPECT_TRUE(fs::exists(path("r.json.manifest.json")));
}

TEST_F(CliTest, EvaluateUnknownMethodIsUsage) {
  pipeline();
  EXPECT_EQ(with_inputs({"evaluate", "--method", "typical", "--param", "1"}, {"--out", path("r.json")}).code, kExitUsage);
  EXPECT_EQ(with_inputs({"evaluate", "--method", "top_p", "--param", "2"}, {"--out", path("r.json")}).code, kExitUsage);
}

TEST_F(CliTest, EvaluateMissingIdsListed) {
  pipeline();
  auto records = load_records(dists_);
  records.erase(records.begin());
  std::ofstream out(dists_);
  write_records(records, out);
  out.close();
  const CliRun r = with_inputs({"evaluate", "--method", "top_k", "--param", "1"}, {"--out", path("r.json")});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("\"The\""), std::string::npos) << r.err;
}

TEST_F(CliTest, ProtocolFailures) {
  pipeline();
  // Replace every record with a shallow export whose top tokens miss the support.
  auto records = load_records(dists_);
  for (auto& r : records) {
    r = testing::make_record({0.5, 0.3}, 0.2, 100, r.prefix_id);
    r.tokens[0].surface = "~";
    r.tokens[1].surface = "~~";
  }
  {
    std::ofstream out(dists_);
    write_records(records, out);
  }
  const CliRun uncovered = with_inputs({"evaluate", "--method", "top_k", "--param", "1"}, {"--out", path("r.json")});
  EXPECT_EQ(uncovered.code, kExitProtocol);
  EXPECT_NE(uncovered.err.find("UncoveredSupport"), std::string::npos) << uncovered.err;

  // Shallow but covering: the support is on top, the cut lands past the export.
  pipeline();
  records = load_records(dists_);
  for (auto& r : records) {
    std::vector<double> probs;
    for (const auto& t : r.tokens) probs.push_back(t.prob * 0.5);
    auto shallow = testing::make_record(probs, 0.5, r.listed() + 100, r.prefix_id);
    for (std::size_t i = 0; i < r.tokens.size(); ++i) shallow.tokens[i].surface = r.tokens[i].surface;
    r = shallow;
  }
  {
    std::ofstream out(dists_);
    write_records(records, out);
  }
  const CliRun overflow = with_inputs({"evaluate", "--method", "top_k", "--param", "50"}, {"--out", path("r.json")});
  EXPECT_EQ(overflow.code, kExitProtocol);
  EXPECT_NE(overflow.err.find("RankOverflow"), std::string::npos) << overflow.err;
}

TEST_F(CliTest, ValidateDists) {
  pipeline();
  EXPECT_EQ(cli({"validate-dists", "--dists", dists_}).code, 0);
  std::ofstream(path("bad.jsonl")) << record_to_json(testing::make_record({0.3, 0.5}, 0.2, 10)) << "\n";
  const CliRun r = cli({"validate-dists", "--dists", path("bad.jsonl")});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST_F(CliTest, CalibrateAndReport) {
  pipeline();
  const CliRun cal = with_inputs({"calibrate", "--method", "top_k", "--target-risk", "0"}, {"--out", path("cal.json")});
  ASSERT_EQ(cal.code, 0) << cal.err;
  const auto result = nlohmann::json::parse(slurp(path("cal.json")));
  EXPECT_TRUE(result.at("feasible").get<bool>());
  EXPECT_EQ(result.at("theta").get<double>(), 1.0);

  const CliRun far = with_inputs({"calibrate", "--method", "top_p", "--target-risk", "5", "--grid", "50"},
                              {"--out", path("cal2.json")});
  ASSERT_EQ(far.code, 0) << far.err;
  EXPECT_FALSE(nlohmann::json::parse(slurp(path("cal2.json"))).at("feasible").get<bool>());

  ASSERT_EQ(with_inputs({"evaluate", "--method", "eta", "--param", "0.01"}, {"--out", path("eta.json")}).code, 0);
  const CliRun md = cli({"report", "--in", path("cal.json"), "--in", path("eta.json")});
  ASSERT_EQ(md.code, 0) << md.err;
  EXPECT_EQ(md.out.rfind("| method | param | avg_risk | RSE | AR |\n", 0), 0u);
  EXPECT_LT(md.out.find("| eta |"), md.out.find("| top_k |"));
  const CliRun csv = cli({"report", "--in", path("eta.json"), "--format", "csv", "--out", path("t.csv")});
  ASSERT_EQ(csv.code, 0);
  EXPECT_EQ(slurp(path("t.csv")).rfind("method,param,avg_risk,rse,ar\neta,0.01,", 0), 0u);
  EXPECT_EQ(cli({"report", "--in", path("eta.json"), "--format", "html"}).code, kExitUsage);
}

TEST_F(CliTest, CalibrateRange) {
  pipeline();
  const CliRun r = with_inputs({"calibrate", "--method", "eta", "--target-risk", "0", "--range", "0.001,0.5"},
                            {"--out", path("c.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("c.json")));
  EXPECT_EQ(j.at("intervals")[0][0].get<double>(), 0.001);
  EXPECT_EQ(j.at("intervals")[0][1].get<double>(), 0.5);
}

TEST_F(CliTest, Correlate) {
  pipeline();
  const CliRun r = with_inputs({"correlate"}, {"--out", path("s.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("pearson_r=", 0), 0u);
  EXPECT_EQ(slurp(path("s.csv")).rfind("prefix_id,entropy_nats,k_star\n", 0), 0u);
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string bin = CPTRIE_CLI_PATH;
  EXPECT_EQ(std::system((bin + " --version > /dev/null").c_str()), 0);
  const int status = std::system((bin + " select-nodes --roots 0 > /dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), kExitUsage);
}

}  // namespace
}  // namespace cptrie
