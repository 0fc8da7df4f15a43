#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cli_app.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = hrgc::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args, int expect_code) {
  args.insert(args.begin(), "--json");
  auto r = run(args);
  EXPECT_EQ(r.code, expect_code) << r.out << r.err;
  return json::parse(r.out);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("hrgc_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void write_input(std::size_t n) {
    std::ofstream f(path("input.bin"), std::ios::binary);
    for (std::size_t i = 0; i < n; ++i) f.put(static_cast<char>((i * 37 + 11) & 0xff));
  }

  std::string slurp(const std::string& name) const {
    std::ifstream f(path(name), std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
  }

  // A q = 3 MSR cluster holding a 500-byte file.
  void make_cluster() {
    ASSERT_EQ(run({"profile", "--q", "3", "--m", "8", "--alphas", "3,2,1", "--out", path("p.txt")}).code, 0);
    write_input(500);
    ASSERT_EQ(run({"encode", "--profile", path("p.txt"), "--input", path("input.bin"), "--outdir", path("c")}).code, 0);
  }

  fs::path dir;
};

}  // namespace

TEST_F(CliTest, RoundTripThroughFailRepairReconstruct) {
  make_cluster();
  auto enc = run_json({"encode", "--profile", path("p.txt"), "--input", path("input.bin"), "--outdir", path("c")}, 0);
  const int chunks = enc["chunks"];
  EXPECT_GT(chunks, 1);
  EXPECT_TRUE(fs::exists(dir / "c" / "chunk0_node8.hrgc"));

  auto f = run_json({"fail", "--cluster", path("c"), "--node", "4"}, 0);
  EXPECT_EQ(f["files_removed"], chunks);
  EXPECT_FALSE(fs::exists(dir / "c" / "chunk0_node4.hrgc"));
  EXPECT_EQ(slurp("c/manifest.txt").find("chunk0_node4.hrgc"), std::string::npos);

  auto v = run_json({"verify", "--cluster", path("c")}, 0);
  EXPECT_EQ(v["failed_nodes"], json::array({4}));

  auto rep = run_json({"repair", "--cluster", path("c"), "--node", "4"}, 0);
  EXPECT_EQ(rep["status"], "ok");
  EXPECT_EQ(rep["chunks_repaired"], chunks);
  EXPECT_TRUE(fs::exists(dir / "c" / "chunk0_node4.hrgc"));
  EXPECT_EQ(run_json({"verify", "--cluster", path("c")}, 0)["mismatched"], json::array());

  auto rec = run_json({"reconstruct", "--cluster", path("c"), "--out", path("out.bin")}, 0);
  EXPECT_EQ(rec["bytes_written"], 500);
  EXPECT_EQ(slurp("out.bin"), slurp("input.bin"));
}

TEST_F(CliTest, DetectAlarmEscalatesOrHalts) {
  make_cluster();
  ASSERT_EQ(run({"fail", "--cluster", path("c"), "--node", "0"}).code, 0);
  auto halted = run_json({"repair", "--cluster", path("c"), "--node", "0", "--mode", "detect", "--adversary", "nodes=1",
                          "--policy", "halt"},
                         2);
  EXPECT_EQ(halted["status"], "alarm-unresolved");
  EXPECT_FALSE(fs::exists(dir / "c" / "chunk0_node0.hrgc"));

  auto esc = run_json({"repair", "--cluster", path("c"), "--node", "0", "--mode", "detect", "--adversary", "nodes=1"}, 0);
  EXPECT_EQ(esc["status"], "alarm-escalated-success");
  EXPECT_EQ(esc["corrupted"], json::array({1}));
  EXPECT_TRUE(esc["chunks"][0]["escalated"].get<bool>());
  EXPECT_EQ(run_json({"verify", "--cluster", path("c")}, 0)["status"], "ok");
}

TEST_F(CliTest, ReconstructUnderAttack) {
  make_cluster();
  auto r = run_json({"reconstruct", "--cluster", path("c"), "--out", path("out.bin"), "--mode", "recover", "--adversary",
                     "nodes=2,7;strategy=offset;offset=3"},
                    0);
  EXPECT_EQ(r["corrupted"], json::array({2, 7}));
  EXPECT_EQ(slurp("out.bin"), slurp("input.bin"));
}

TEST_F(CliTest, DecodeFailureExitCode) {
  make_cluster();
  ASSERT_EQ(run({"fail", "--cluster", path("c"), "--node", "0"}).code, 0);
  auto r = run_json({"repair", "--cluster", path("c"), "--node", "0", "--mode", "recover", "--adversary", "nodes=1,4,7"}, 3);
  EXPECT_EQ(r["status"], "decode-failure");
  EXPECT_FALSE(fs::exists(dir / "c" / "chunk0_node0.hrgc"));

  for (const char* n : {"1", "2", "3"}) ASSERT_EQ(run({"fail", "--cluster", path("c"), "--node", n}).code, 0);
  auto few = run_json({"repair", "--cluster", path("c"), "--node", "0"}, 3);
  EXPECT_EQ(few["error"], "NotEnoughHelpers");
}

TEST_F(CliTest, BadInputAndIoExitCodes) {
  EXPECT_EQ(run({"profile", "--q", "6", "--m", "8", "--alphas", "3,2,1", "--out", path("p.txt")}).code, 4);
  EXPECT_EQ(run({"profile", "--q", "3", "--m", "8", "--alphas", "3,3,1", "--out", path("p.txt")}).code, 4);
  EXPECT_EQ(run({"profile", "--q", "3"}).code, 4);
  EXPECT_EQ(run({"nosuchcommand"}).code, 4);
  EXPECT_EQ(run({"repair", "--cluster", path("missing"), "--node", "0"}).code, 5);

  make_cluster();
  EXPECT_EQ(run({"repair", "--cluster", path("c"), "--node", "3"}).code, 4);
  EXPECT_EQ(run({"fail", "--cluster", path("c"), "--node", "9"}).code, 4);
  ASSERT_EQ(run({"fail", "--cluster", path("c"), "--node", "3"}).code, 0);
  EXPECT_EQ(run({"fail", "--cluster", path("c"), "--node", "3"}).code, 4);
  EXPECT_EQ(run({"repair", "--cluster", path("c"), "--node", "3", "--adversary", "nodes=x"}).code, 4);
  EXPECT_EQ(run({"repair", "--cluster", path("c"), "--node", "3", "--policy", "maybe"}).code, 4);

  auto r = run_json({"encode", "--profile", path("nothere.txt"), "--input", path("input.bin"), "--outdir", path("d")}, 5);
  EXPECT_EQ(r["status"], "io");
}

TEST_F(CliTest, ForeignProfileIsRejected) {
  make_cluster();
  ASSERT_EQ(run({"profile", "--q", "3", "--m", "8", "--alphas", "3,2,1", "--seed", "9", "--out", path("c/profile.txt")}).code, 0);
  auto r = run_json({"reconstruct", "--cluster", path("c"), "--out", path("out.bin")}, 4);
  EXPECT_EQ(r["error"], "BadFormat");
}

TEST_F(CliTest, CapabilityCsv) {
  auto r = run({"capability", "--q-range", "4:6:2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out,
            "q,alphas,ds,tau_hmsr,tau_rsmsr\n"
            "4,6;5;4;3,12;10;8;6,16,12\n"
            "6,10;9;8;7;6;5,20;18;16;14;12;10,72,60\n");
  EXPECT_NE(r.err.find("rule:"), std::string::npos);

  ASSERT_EQ(run({"capability", "--out", path("cap.csv")}).code, 0);
  const auto csv = slurp("cap.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);
  EXPECT_NE(csv.find("\n16,"), std::string::npos);

  EXPECT_EQ(run({"capability", "--q-range", "4:6"}).code, 4);
}

TEST_F(CliTest, ProfileAndInspectReports) {
  auto p = run_json({"profile", "--q", "4", "--m", "37", "--mode", "mbr", "--alphas", "6,5,4,3", "--ks", "2,5,4,3", "--out",
                     path("p.txt")},
                    0);
  EXPECT_EQ(p["mode"], "mbr");
  EXPECT_EQ(p["A"], 60);
  EXPECT_TRUE(p["lambda_check"]["distinct"].get<bool>());
  EXPECT_EQ(p["digest"].get<std::string>().size(), 16u);

  write_input(64);
  ASSERT_EQ(run({"encode", "--profile", path("p.txt"), "--input", path("input.bin"), "--outdir", path("c")}).code, 0);
  auto i = run_json({"--report", path("r.json"), "inspect", "--file", path("c/chunk0_node5.hrgc"), "--profile", path("p.txt")}, 0);
  EXPECT_EQ(i["id"], 5);
  EXPECT_EQ(i["q"], 4);
  EXPECT_TRUE(i["matches_profile"].get<bool>());
  EXPECT_EQ(json::parse(slurp("r.json"))["id"], 5);

  auto text = run({"inspect", "--file", path("c/chunk0_node5.hrgc")});
  EXPECT_EQ(text.code, 0);
  EXPECT_EQ(text.out.rfind("node 5 mode=mbr q=4", 0), 0u);
}
