#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dialectid/corpus.hpp"
#include "dialectid/io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(DIALECTID_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dialectid_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& content) const {
    std::ofstream(dir_ / name, std::ios::binary) << content;
  }
  std::string read(const std::string& name) const { return dialectid::io::read_file(dir_ / name); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, NormalizeTsvKeepsLabelsAndIsIdempotent) {
  write("in.tsv", "Egypt\tوالله متععععههههه http://x.y\nSudan\tالعالمين @me\n");
  ASSERT_EQ(run("normalize -i " + path("in.tsv") + " -o " + path("once.tsv")), 0);
  ASSERT_EQ(run("normalize -i " + path("once.tsv") + " -o " + path("twice.tsv")), 0);
  EXPECT_EQ(read("once.tsv"), "Egypt\tو+ الله متعه\nSudan\tال+ عالم +ين\n");
  EXPECT_EQ(read("twice.tsv"), read("once.tsv"));
}

TEST_F(Cli, NormalizeEmptyFile) {
  write("empty.txt", "");
  ASSERT_EQ(run("normalize -i " + path("empty.txt") + " -o " + path("out.txt")), 0);
  EXPECT_EQ(read("out.txt"), "");
}

TEST_F(Cli, ExitCodesAndNoPartialOutput) {
  write("bad.tsv", "Egypt\tok\nAtlantis\txyz\n");
  write("out.tsv", "previous");
  EXPECT_EQ(run("normalize -i " + path("bad.tsv") + " -o " + path("out.tsv")), 3);
  EXPECT_EQ(read("out.tsv"), "previous");
  EXPECT_EQ(run("normalize -i " + path("missing.tsv") + " -o " + path("out.tsv")), 3);
  EXPECT_EQ(run("normalize --bogus"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("normalize -i " + path("bad.tsv") + " -o " + path("o.tsv") + " --set nope=1"), 2);
  for (const auto& e : fs::directory_iterator(dir_))
    EXPECT_EQ(e.path().string().find(".tmp."), std::string::npos) << e.path();
}

TEST_F(Cli, SynthIsSeededAndUpsampleHitsTarget) {
  const std::string synth = "synth --set synth.num_classes=3 --set synth.default_count=5 --seed 9 --train-out ";
  ASSERT_EQ(run(synth + path("a.tsv")), 0);
  ASSERT_EQ(run(synth + path("b.tsv")), 0);
  ASSERT_EQ(run("synth --set synth.num_classes=3 --set synth.default_count=5 --seed 10 --train-out " + path("c.tsv")), 0);
  EXPECT_EQ(read("a.tsv"), read("b.tsv"));
  EXPECT_NE(read("a.tsv"), read("c.tsv"));
  ASSERT_EQ(run("upsample -i " + path("a.tsv") + " -o " + path("up.tsv") + " --target 8"), 0);
  const auto h = dialectid::label_histogram(dialectid::load_tsv(path("up.tsv")));
  EXPECT_EQ(h[0], 8u);
  EXPECT_EQ(h[2], 8u);
}

TEST_F(Cli, TrainPredictEvaluateHybrid) {
  const std::string cfg =
      "--seed 3 --set synth.num_classes=21 --set synth.default_count=6 --set synth.dev_count=2 "
      "--set finetune.epochs=1 --set encoder.hidden_dim=16 --set encoder.ffn_dim=16 --set encoder.num_layers=1";
  ASSERT_EQ(run("synth " + cfg + " --train-out " + path("train.tsv") + " --dev-out " + path("dev.tsv")), 0);
  ASSERT_EQ(run("build-vocab " + cfg + " -i " + path("train.tsv") + " -o " + path("vocab.txt") + " --vocab-size 300"), 0);
  ASSERT_EQ(run("finetune " + cfg + " --mode hybrid --train " + path("train.tsv") + " --vocab " +
                path("vocab.txt") + " -o " + path("model")),
            0);
  std::ostringstream texts;
  for (const auto& ex : dialectid::load_tsv(path("dev.tsv")).examples) texts << ex.text << "\n";
  write("dev.txt", texts.str());
  ASSERT_EQ(run("predict -m " + path("model") + " -i " + path("dev.txt") + " -o " + path("pred.txt")), 0);
  const auto lines = dialectid::io::read_lines(path("pred.txt"));
  ASSERT_EQ(lines.size(), 42u);
  for (const auto& l : lines) {
    const auto tab = l.find('\t');
    ASSERT_NE(tab, std::string::npos);
    const auto route = l.substr(tab + 1);
    EXPECT_TRUE(route == "direct" || route == "nb") << l;
  }
  ASSERT_EQ(run("evaluate --gold " + path("dev.tsv") + " --predictions " + path("pred.txt") +
                " --format tsv -o " + path("report.tsv")),
            0);
  EXPECT_NE(read("report.tsv").find("macro_f1\t"), std::string::npos);
  write("short.txt", "Egypt\n");
  EXPECT_EQ(run("evaluate --gold " + path("dev.tsv") + " --predictions " + path("short.txt")), 3);
}
