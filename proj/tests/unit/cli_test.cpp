#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"

namespace bioauth::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("bioauth-cli-") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }

  fs::path dir;
};

TEST_F(CliTest, RegisterWritesDistinctRecords) {
  const auto r = invoke({"register", "--count", "10", "--out", path("db.txt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream f(path("db.txt"));
  const EnrolmentDb db = read_db(f);
  EXPECT_EQ(db.l, 128u);
  ASSERT_EQ(db.records.size(), 10u);
  std::set<BitString> ids;
  for (const auto& rec : db.records) ids.insert(rec.id);
  EXPECT_EQ(ids.size(), 10u);
  EXPECT_EQ(db.records[0].label, "s0000");
  EXPECT_EQ(nlohmann::json::parse(r.out)["distinct_ids"], 10);
}

TEST_F(CliTest, RegisterZeroGivesValidEmptyDb) {
  ASSERT_EQ(invoke({"register", "--count", "0", "--out", path("empty.db")}).code, kExitOk);
  EXPECT_EQ(slurp(path("empty.db")), "bioauthdb v1 l=128\n");
  std::ifstream f(path("empty.db"));
  EXPECT_TRUE(read_db(f).records.empty());
}

TEST_F(CliTest, RegisterIsByteIdenticalOnRerun) {
  ASSERT_EQ(invoke({"register", "--count", "5", "--seed", "9", "--out", path("a.db")}).code, kExitOk);
  ASSERT_EQ(invoke({"register", "--count", "5", "--seed", "9", "--out", path("b.db")}).code, kExitOk);
  EXPECT_EQ(slurp(path("a.db")), slurp(path("b.db")));
  ASSERT_EQ(invoke({"register", "--count", "5", "--seed", "10", "--out", path("c.db")}).code, kExitOk);
  EXPECT_NE(slurp(path("a.db")), slurp(path("c.db")));
}

TEST_F(CliTest, UnwritablePathIsAnIoError) {
  EXPECT_EQ(invoke({"register", "--count", "1", "--out", path("missing/dir/db")}).code, kExitIo);
}

TEST_F(CliTest, AuthGenuineAndImpostor) {
  ASSERT_EQ(invoke({"register", "--count", "3", "--out", path("db")}).code, kExitOk);
  const auto ok = invoke({"auth", "--db", path("db"), "--tag-index", "2", "--noise-sigma", "0"});
  ASSERT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_EQ(nlohmann::json::parse(ok.out)["bio_verified"], true);
  const auto bad = invoke({"auth", "--db", path("db"), "--tag-index", "1", "--impostor"});
  EXPECT_EQ(bad.code, kExitUnexpected);
  EXPECT_EQ(nlohmann::json::parse(bad.out)["failure_stage"], "BioVerify");
  EXPECT_EQ(invoke({"auth", "--db", path("db"), "--tag-index", "3"}).code, kExitUsage);
  EXPECT_EQ(invoke({"auth", "--db", path("nope")}).code, kExitIo);
}

TEST_F(CliTest, AuthRunsBaselines) {
  ASSERT_EQ(invoke({"register", "--protocol", "rhls", "--count", "2", "--out", path("db")}).code, kExitOk);
  const auto r = invoke({"auth", "--protocol", "rhls", "--db", path("db"), "--tag-index", "1"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
}

TEST_F(CliTest, MalformedDatabaseIsAnIoError) {
  std::ofstream(path("bad.db")) << "not a database\n";
  EXPECT_EQ(invoke({"auth", "--db", path("bad.db")}).code, kExitIo);
}

TEST_F(CliTest, AttackOracle) {
  struct Case {
    std::vector<std::string> args;
    bool succeeded;
  };
  const std::vector<Case> cases = {
      {{"attack", "replay", "--protocol", "proposed"}, false},
      {{"attack", "replay", "--protocol", "rhls"}, true},
      {{"attack", "ch-algebraic", "--protocol", "ch"}, true},
      {{"attack", "ch-algebraic", "--protocol", "proposed"}, false},
      {{"attack", "mitm", "--protocol", "proposed"}, false},
      {{"attack", "desync", "--protocol", "proposed"}, false},
      {{"attack", "dos", "--protocol", "proposed", "--trials", "500"}, false},
      {{"attack", "dy-search", "--protocol", "proposed", "--sessions", "2"}, false},
      {{"attack", "dy-search", "--protocol", "rhls", "--sessions", "2"}, true},
  };
  for (const auto& c : cases) {
    const auto r = invoke(c.args);
    EXPECT_EQ(r.code, kExitOk) << c.args[1] << " " << c.args[3] << ": " << r.err << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["succeeded"], c.succeeded) << c.args[1] << " " << c.args[3];
    EXPECT_EQ(j["as_expected"], true);
  }
}

TEST_F(CliTest, DySearchReportsCompleteness) {
  const auto r = invoke({"attack", "dy-search", "--protocol", "proposed", "--sessions", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["incomplete"], false);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({"attack", "nonsense"}).code, kExitUsage);
  EXPECT_EQ(invoke({"attack", "replay", "--protocol", "lcap"}).code, kExitUsage);
  EXPECT_EQ(invoke({"attack", "ch-algebraic", "--protocol", "rhls"}).code, kExitUsage);
  EXPECT_EQ(invoke({"attack", "trace", "--trials", "0"}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"register"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST_F(CliTest, CellsOutsideTheOracleHaveNoExpectation) {
  const auto r = invoke({"attack", "replay", "--protocol", "ch"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_TRUE(nlohmann::json::parse(r.out)["expected"].is_null());
}

TEST_F(CliTest, AttackTranscriptIsWrittenAndReproducible) {
  ASSERT_EQ(invoke({"attack", "replay", "--protocol", "rhls", "--seed", "4", "--out", path("a.jsonl")}).code, kExitOk);
  ASSERT_EQ(invoke({"attack", "replay", "--protocol", "rhls", "--seed", "4", "--out", path("b.jsonl")}).code, kExitOk);
  EXPECT_FALSE(slurp(path("a.jsonl")).empty());
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
}

TEST_F(CliTest, TablesAreByteIdenticalOnRerun) {
  const std::vector<std::string> base = {"tables", "--trials", "500", "--seed", "3"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a")});
  b.insert(b.end(), {"--out", path("b")});
  ASSERT_EQ(invoke(a).code, kExitOk);
  ASSERT_EQ(invoke(b).code, kExitOk);
  for (const char* f : {"table1.csv", "table1.md", "table1.json", "table2.csv", "table2.md", "table2.json"}) {
    EXPECT_FALSE(slurp(dir / "a" / f).empty()) << f;
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  const std::string table2 = slurp(dir / "a" / "table2.csv");
  EXPECT_NE(table2.find("\nproposed,2,2,0.5,2.5,3,"), std::string::npos);
  // Every executed cell says so.
  std::istringstream rows(slurp(dir / "a" / "table1.csv"));
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    if (line.rfind("proposed,", 0) == 0) {
      EXPECT_NE(line.find(",executed,"), std::string::npos) << line;
    }
  }
}

TEST_F(CliTest, SeedFallsBackToEnvironment) {
  ::setenv("BIOAUTH_LAB_SEED", "77", 1);
  const auto r = invoke({"register", "--count", "1", "--out", path("db")});
  ::unsetenv("BIOAUTH_LAB_SEED");
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_EQ(nlohmann::json::parse(r.out)["seed"], 77);
}

TEST(SubjectSeedTest, DependsOnlyOnTheLabel) {
  EXPECT_EQ(subject_seed_for("s0001"), subject_seed_for("s0001"));
  EXPECT_NE(subject_seed_for("s0001"), subject_seed_for("s0002"));
}

TEST(EnrolmentDbTest, RoundTrips) {
  EnrolmentDb db{16, {{"x", BitString::from_hex("abcd", 16), BitString::from_hex("0102", 16)}}};
  std::stringstream s;
  write_db(s, db);
  const EnrolmentDb back = read_db(s);
  ASSERT_EQ(back.records.size(), 1u);
  EXPECT_EQ(back.records[0].id, db.records[0].id);
  EXPECT_EQ(back.records[0].secret, db.records[0].secret);
  std::stringstream bad("bioauthdb v1 l=16\nx zz 0102\n");
  EXPECT_THROW(read_db(bad), IoError);
}

}  // namespace
}  // namespace bioauth::cli
