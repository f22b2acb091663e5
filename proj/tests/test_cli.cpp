#include "fixtures.hpp"

#include "dsm/cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace dsm;
using dsm::testing::order;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dsm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp(const std::string& name) { return ::testing::TempDir() + "/" + name; }

}  // namespace

TEST(Cli, RunOnEmptyInstance) {
  const auto path = temp("empty.json");
  save_instance(MarketInstance{}, path);
  const auto r = cli({"run", "--mechanism", "prm", "--instance", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_TRUE(report["outcome"]["assignment"].empty());
  EXPECT_EQ(report["outcome"]["gft"]["exact"], "0/1");
}

TEST(Cli, AuditFixture) {
  const auto path = temp("fixture.json");
  save_instance(dsm::testing::prm_fixture(), path);
  EXPECT_EQ(cli({"audit", "--instance", path, "--mechanism", "prm", "--checks", "bb,ir"}).code, 0);
  EXPECT_EQ(cli({"audit", "--instance", path, "--mechanism", "prm", "--gamma", "1"}).code, 0);
  const auto broken = cli({"audit", "--instance", path, "--mechanism", "broken-prm", "--checks", "ic"});
  EXPECT_EQ(broken.code, 1);
  EXPECT_FALSE(nlohmann::json::parse(broken.out)["ic"]["holds"].get<bool>());
}

TEST(Cli, GenerateRunAndMontecarlo) {
  const auto spec = temp("spec.json");
  write_file(spec, R"({"preset":"gamma1-double-auction","n":200,"seed":3})");
  const auto inst = temp("gen.json");
  ASSERT_EQ(cli({"generate", "--spec", spec, "--out", inst}).code, 0);
  EXPECT_EQ(load_instance(inst).users().size(), 200u);

  const auto a = cli({"run", "--mechanism", "tpm", "--instance", inst, "--alpha", "1/100", "--seed", "4"});
  const auto b = cli({"run", "--mechanism", "tpm", "--instance", inst, "--alpha", "1/100", "--seed", "4"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);

  const auto csv = temp("mc.csv");
  ASSERT_EQ(cli({"montecarlo", "--mechanism", "tpm", "--instance", inst, "--alpha", "1/100", "--trials", "50",
                 "--seeds", "10", "--out", csv})
                .code,
            0);
  const auto text = read_file(csv);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 52);
  EXPECT_EQ(text.rfind(kCsvHeader, 0), 0u);

  const auto zero = cli({"montecarlo", "--mechanism", "tpm", "--instance", inst, "--alpha", "1/100", "--trials", "0",
                         "--seeds", "0"});
  EXPECT_EQ(zero.out, std::string(kCsvHeader) + "\n");
  EXPECT_EQ(cli({"audit", "--instance", inst, "--mechanism", "tpm", "--alpha", "1/100", "--checks", "bb,ir,invariants"})
                .code,
            0);
}

TEST(Cli, Errors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"run", "--mechanism", "vcg", "--instance", "x"}).code, 2);
  EXPECT_EQ(cli({"run", "--mechanism", "prm", "--instance", temp("missing.json")}).code, 2);
  const auto garbage = temp("garbage.json");
  write_file(garbage, "{not json");
  const auto r = cli({"run", "--mechanism", "prm", "--instance", garbage});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
  const auto path = temp("fixture2.json");
  save_instance(dsm::testing::prm_fixture(), path);
  EXPECT_EQ(cli({"run", "--mechanism", "tpm", "--instance", path}).code, 2);  // no alpha
  EXPECT_EQ(cli({"run", "--mechanism", "tpm", "--instance", path, "--alpha", "2"}).code, 2);
  EXPECT_EQ(cli({"audit", "--instance", path, "--mechanism", "prm", "--checks", "bogus"}).code, 2);
  EXPECT_EQ(cli({"run", "--mechanism", "prm", "--instance", path, "--out", "/nonexistent/dir/r.json"}).code, 2);
}

TEST(Cli, BinaryExitCodes) {
  const auto path = temp("fixture3.json");
  save_instance(dsm::testing::prm_fixture(), path);
  const std::string bin = DSM_CLI_PATH;
  EXPECT_EQ(std::system((bin + " audit --instance " + path + " --mechanism prm --checks bb,ir > /dev/null").c_str()), 0);
  const int broken = std::system((bin + " audit --instance " + path + " --mechanism broken-prm --checks ic > /dev/null").c_str());
  EXPECT_EQ(WEXITSTATUS(broken), 1);
}
