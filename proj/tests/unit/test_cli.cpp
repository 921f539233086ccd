#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hpyc/cli.hpp"

using namespace hpyc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "hpyc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    dir = fs::path(HPYC_TMP_DIR) / ("cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "train.txt") << "der alte schulhof\ndie eisenbahn fährt\nder friedhof\nein schulhof\n"
                                        "die bahn hält\nder hof\n";
    std::ofstream(dir / "test.txt") << "der schulhof\ndie neue bahn\n";
    std::ofstream(dir / "seg.tsv") << "schulhof\tschul hof\nfriedhof\tfried hof\neisenbahn\teisen bahn\n";
  }
  std::string p(const char* name) const { return (dir / name).string(); }
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(call({}).code, exit_usage);
  EXPECT_EQ(call({"frobnicate"}).code, exit_usage);
  EXPECT_EQ(call({"train", "--train", p("train.txt")}).code, exit_usage);
  EXPECT_EQ(call({"train", "--model", "hpylmc", "--train", p("train.txt"), "--out", p("m")}).code, exit_usage);
  EXPECT_EQ(call({"train", "--model", "lstm", "--train", p("train.txt"), "--out", p("m")}).code, exit_usage);
  EXPECT_EQ(call({"train", "--order", "0", "--train", p("train.txt"), "--out", p("m")}).code, exit_usage);
  EXPECT_EQ(call({"--help"}).code, exit_ok);
}

TEST_F(Cli, IoAndFormatErrors) {
  EXPECT_EQ(call({"train", "--train", p("missing.txt"), "--out", p("m")}).code, exit_io);
  std::ofstream(dir / "bad.txt") << "ok\n\xff\xfe\n";
  EXPECT_EQ(call({"train", "--train", p("bad.txt"), "--out", p("m")}).code, exit_format);
  std::ofstream(dir / "junk.model") << "garbage";
  EXPECT_EQ(call({"inspect", "--model-file", p("junk.model")}).code, exit_format);
  EXPECT_EQ(call({"perplexity", "--model-file", p("nope.model"), "--test", p("test.txt")}).code, exit_io);
}

TEST_F(Cli, RenormalizeNeedsCompoundModel) {
  ASSERT_EQ(call({"train", "--burn-in", "1", "--order", "2", "--train", p("train.txt"), "--out", p("h.model")}).code, 0);
  EXPECT_EQ(call({"perplexity", "--model-file", p("h.model"), "--test", p("test.txt"), "--renormalize"}).code,
            exit_usage);
}

TEST_F(Cli, TrainEvaluateBreakdownCompare) {
  ASSERT_EQ(call({"train", "--model", "hpylmc", "--seg", p("seg.tsv"), "--order", "3", "--burn-in", "3", "--seed", "7",
                  "--train", p("train.txt"), "--out", p("c.model"), "--trace", p("trace.tsv")})
                .code,
            0);
  EXPECT_TRUE(fs::exists(p("c.model.json")));
  const auto manifest = nlohmann::json::parse(slurp(p("c.model.json")));
  EXPECT_EQ(manifest["direction"], "ling");
  EXPECT_EQ(manifest["seed"], 7);

  Result r = call({"perplexity", "--model-file", p("c.model"), "--test", p("test.txt"), "--renormalize", "--report",
                   p("r.tsv"), "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("ppl="), std::string::npos);
  EXPECT_NE(r.out.find("renormalized"), std::string::npos);

  r = call({"breakdown", "--report", p("r.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream rows(r.out);
  int lines = 0;
  for (std::string line; std::getline(rows, line);) lines += line[0] != '#';
  EXPECT_EQ(lines, 1 + 2 * 3 + 1);  // header, 2n subsets, oov

  r = call({"compare", "--a", p("r.tsv"), "--b", p("r.tsv"), "--margins", p("m.tsv"), "--top", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream cmp(r.out);
  std::string line;
  std::getline(cmp, line);
  while (std::getline(cmp, line)) EXPECT_EQ(line.substr(line.rfind('\t') + 1), "0") << line;

  r = call({"inspect", "--model-file", p("c.model")});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["model"], "hpylmc");
}

TEST_F(Cli, RerunsAreByteIdentical) {
  for (const char* model : {"mkn", "hpylm", "hpylmc"}) {
    std::vector<std::string> outs;
    for (const char* run_name : {"a", "b"}) {
      const std::string m = p(run_name) + std::string(".") + model;
      ASSERT_EQ(call({"train", "--model", model, "--seg", p("seg.tsv"), "--order", "3", "--burn-in", "4", "--seed", "3",
                      "--train", p("train.txt"), "--out", m, "--manifest", p("manifest.json")})
                    .code,
                0);
      Result r = call({"perplexity", "--model-file", m, "--test", p("test.txt"), "--report", p("rep.tsv"),
                       "--manifest", p("rep.json")});
      ASSERT_EQ(r.code, 0) << r.err;
      outs.push_back(slurp(m) + slurp(p("manifest.json")) + slurp(p("rep.tsv")) + r.out);
    }
    EXPECT_EQ(outs[0], outs[1]) << model;
  }
}

TEST_F(Cli, VocabAndArpa) {
  Result r = call({"vocab", "--train", p("train.txt"), "--min-count", "2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("der\t"), std::string::npos);
  EXPECT_EQ(r.out.find("fährt"), std::string::npos);
  ASSERT_EQ(call({"train", "--model", "mkn", "--order", "2", "--train", p("train.txt"), "--out", p("k.model")}).code, 0);
  r = call({"export-arpa", "--model-file", p("k.model")});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\\2-grams:"), std::string::npos);
  ASSERT_EQ(call({"train", "--burn-in", "0", "--order", "2", "--train", p("train.txt"), "--out", p("h.model")}).code, 0);
  EXPECT_EQ(call({"export-arpa", "--model-file", p("h.model")}).code, exit_usage);
}
