#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "bplab/harness.hpp"

using namespace bplab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bplab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string config_error(const std::string& text) {
  try {
    config_from_json(Json::parse(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ClosedForms, BlockQBallVolume) {
  using std::numbers::pi;
  EXPECT_NEAR(block_q_ball_volume(1, 3, 1.0), 8.0 / 6.0, 1e-13);
  EXPECT_NEAR(block_q_ball_volume(2, 3, 2.0), ball_volume(6), 1e-13);
  EXPECT_NEAR(block_q_ball_volume(2, 3, 4.0), std::pow(pi, 4) / 6, 1e-12);
  EXPECT_NEAR(block_q_ball_volume(1, 2, 1e6), 4.0, 1e-4);  // the square
  const auto v = exact_volume(make_block_norm_body(2, 3, 3.0, {2.0, 1.0, 1.0}, 0.0));
  ASSERT_TRUE(v.has_value());
  EXPECT_NEAR(*v, std::pow(2.0, -2.0 / 3.0) * block_q_ball_volume(2, 3, 3.0), 1e-13);
  EXPECT_FALSE(exact_volume(make_random_block_norm_body(2, 3, 1)).has_value() &&
               std::get<BlockNormBody>(make_random_block_norm_body(2, 3, 1).shape).delta > 0);
}

TEST(ExpectedAnswer, Table) {
  EXPECT_EQ(expected_answer(1, 4), Answer::Affirmative);
  EXPECT_EQ(expected_answer(2, 4), Answer::Negative);
  EXPECT_EQ(expected_answer(2, 2), Answer::Affirmative);
  EXPECT_EQ(expected_answer(2, 3), Answer::Affirmative);
  EXPECT_EQ(expected_answer(4, 3), Answer::Negative);
  EXPECT_EQ(expected_answer(1, 5), Answer::Negative);
  EXPECT_EQ(expected_answer(8, 2), Answer::Affirmative);
  EXPECT_EQ(expected_answer(4, 2), Answer::Affirmative);
}

TEST(Classify, WithoutVerification) {
  ClassifyOptions opt;
  opt.max_n = 5;
  opt.kappas = {1, 2, 3, 4};
  const auto rows = classify(opt, 1);
  ASSERT_EQ(rows.size(), 16u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.evidence, Evidence::NotRun);
    EXPECT_EQ(r.answer, expected_answer(r.kappa, r.n));
    if (r.kappa == 3) {
      EXPECT_NE(r.details.find("Hurwitz-Radon"), std::string::npos);
      EXPECT_TRUE(r.route.empty());
    }
  }
  auto find = [&](int k, int n) {
    return *std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.kappa == k && r.n == n; });
  };
  EXPECT_EQ(find(2, 2).route, "section_volume");
  EXPECT_EQ(find(2, 4).route, "even_integer(m=2)");
  EXPECT_TRUE(find(2, 5).route.empty());
  EXPECT_NE(find(2, 5).details.find("> 4"), std::string::npos);
  ClassifyOptions bad;
  bad.max_n = 1;
  EXPECT_THROW(classify(bad, 1), InvalidArgument);
}

TEST(Classify, VerifiesAffirmativeRows) {
  ClassifyOptions opt;
  opt.max_n = 3;
  opt.kappas = {2};
  opt.verify = true;
  opt.scan_dirs = 4;
  const auto rows = classify(opt, 3);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.evidence, Evidence::PositivityScanPassed) << r.kappa << "," << r.n << ": " << r.details;
    EXPECT_EQ(r.report["scans"].size(), 8u);
  }
  const CsvTable t = classification_table(rows);
  EXPECT_EQ(t.str().substr(0, t.str().find('\n')), "kappa,n,paper_answer,numerical_evidence,route,details");
}

TEST(Gallery, ConvexInvariantFixtures) {
  for (auto [k, n] : {std::pair{1, 3}, std::pair{2, 3}, std::pair{4, 2}}) {
    const auto g = fixture_gallery(k, n, 5);
    ASSERT_EQ(g.size(), 8u);
    for (const auto& e : g) {
      EXPECT_EQ(check_convexity(e.body, 20000, 1).violations, 0) << e.name;
      EXPECT_LE(check_invariance(e.body, 2000, 1), 1e-10) << e.name;
    }
  }
  EXPECT_EQ(body_to_json(fixture_gallery(2, 3, 5)[6].body).dump(), body_to_json(fixture_gallery(2, 3, 5)[6].body).dump());
  EXPECT_NE(body_to_json(fixture_gallery(2, 3, 5)[6].body).dump(), body_to_json(fixture_gallery(2, 3, 6)[6].body).dump());
}

TEST(Config, ValidationMessagesCarryLocations) {
  EXPECT_NE(config_error(R"({"suite":"volume","kappa":2,"n":3})").find("/seed"), std::string::npos);
  EXPECT_NE(config_error(R"({"suite":"bogus","kappa":2,"n":3,"seed":1})").find("/suite"), std::string::npos);
  EXPECT_NE(config_error(R"({"suite":"volume","kappa":3,"n":3,"seed":1})").find("/kappa"), std::string::npos);
  EXPECT_NE(config_error(R"({"suite":"volume","kappa":2,"n":5,"seed":1})").find("/kappa, /n"), std::string::npos);
  EXPECT_NE(config_error(R"({"suite":"volume","kappa":2,"n":3,"seed":1,
        "bodies":[{"kind":"euclidean_ball"},{"kind":"block_q_ball","kappa":2,"n":4,"q":4}]})")
                .find("/bodies/1"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"suite":"volume","kappa":2,"n":3,"seed":1,"quadrature":{"fd_step":-1}})")
                .find("/quadrature"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"suite":"brunn","kappa":2,"n":3,"seed":1,"frac_qs":[0.5,2.0]})").find("/frac_qs/1"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"suite":"volume","kappa":2,"n":3,"seed":-4})").find("/seed"), std::string::npos);
  EXPECT_EQ(config_error(R"({"suite":"classify","seed":1,"classify":{"max_n":4,"kappas":[1,2]}})"), "");
}

TEST(Config, InlineBodiesAndDefaults) {
  const ExperimentConfig c = config_from_json(Json::parse(R"({
    "suite": "section", "kappa": 2, "n": 3, "seed": 42,
    "bodies": [{"name": "unit", "kind": "euclidean_ball"}, {"kind": "block_q_ball", "q": 4}],
    "quadrature": {"n_samples": 1234, "t_grid": {"points": 256}},
    "output": {"dir": "somewhere", "name": "sec"}
  })"));
  EXPECT_EQ(c.suite, Suite::Section);
  EXPECT_EQ(c.seed, 42u);
  ASSERT_EQ(c.bodies.size(), 2u);
  EXPECT_EQ(c.bodies[0].name, "unit");
  EXPECT_EQ(c.bodies[1].name, "body1");
  EXPECT_EQ(c.params.n_samples, 1234);
  EXPECT_EQ(c.params.t_grid.points, 256);
  EXPECT_EQ(c.params.fd_step, QuadratureParams{}.fd_step);
  EXPECT_EQ(c.out_dir, fs::path("somewhere"));
}

TEST(Run, VolumeSuiteOnBallPassesAndIsByteStable) {
  const fs::path dir = scratch_dir("volume");
  ExperimentConfig c = config_from_json(Json::parse(R"({
    "suite": "volume", "kappa": 2, "n": 2, "seed": 7,
    "bodies": [{"kind": "euclidean_ball"}, {"kind": "block_q_ball", "q": 3}],
    "quadrature": {"n_samples": 200000}
  })"));
  c.out_dir = dir / "a";
  EXPECT_EQ(run(c), 0);
  c.out_dir = dir / "b";
  EXPECT_EQ(run(c), 0);
  const std::string ja = slurp(dir / "a" / "report.json"), jb = slurp(dir / "b" / "report.json");
  EXPECT_FALSE(ja.empty());
  EXPECT_EQ(ja, jb);
  EXPECT_EQ(slurp(dir / "a" / "report.csv"), slurp(dir / "b" / "report.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "report.dat"));
  const Json j = Json::parse(ja);
  EXPECT_EQ(j["results"][0]["status"], "pass");
  EXPECT_EQ(j["exit_code"], 0);
  fs::remove_all(dir);
}

TEST(Run, QuantitativeFailureExitsTwo) {
  ExperimentConfig c = config_from_json(Json::parse(R"({
    "suite": "volume", "kappa": 2, "n": 2, "seed": 7, "bodies": [{"kind": "block_q_ball", "q": 3}],
    "quadrature": {"n_samples": 20000}, "tolerances": {"sigma": 1e-9}
  })"));
  c.out_dir = scratch_dir("fail");
  EXPECT_EQ(run(c), 2);
  fs::remove_all(c.out_dir);
}

TEST(Run, InconclusiveExitsThree) {
  SuiteReport r;
  r.record("b", "i", "q", Estimate{}, std::nullopt, Status::Pass);
  EXPECT_EQ(r.exit_code(), 0);
  r.record("b", "i", "q", Estimate{}, std::nullopt, Status::Inconclusive);
  EXPECT_EQ(r.exit_code(), 3);
  r.record("b", "i", "q", Estimate{}, std::nullopt, Status::Fail);
  EXPECT_EQ(r.exit_code(), 2);
}

TEST(Run, SectionSuiteTargets) {
  ExperimentConfig c = config_from_json(Json::parse(R"({
    "suite": "section", "kappa": 2, "n": 3, "seed": 3, "n_dirs": 2,
    "bodies": [{"kind": "euclidean_ball"}, {"kind": "block_q_ball", "q": 4}],
    "quadrature": {"n_samples": 100000}
  })"));
  const SuiteReport r = run_suite(c);
  const Json j = r.to_json(c);
  int targets = 0;
  for (const auto& row : j["results"]) {
    if (!row["target"].is_null()) {
      ++targets;
      EXPECT_EQ(row["status"], "pass") << row.dump();
    }
  }
  EXPECT_EQ(targets, 6 /* ball: 2 seeded, 3 axis, 1 diagonal */ + 3 /* B_4 at the block axes */);
  EXPECT_EQ(r.exit_code(), 0);
}

TEST(Run, ParsevalSuiteDefaultPairs) {
  ExperimentConfig c = config_from_json(Json::parse(R"({
    "suite": "parseval", "kappa": 2, "n": 3, "seed": 5, "n_dirs": 32, "quadrature": {"n_samples": 50000}
  })"));
  const SuiteReport r = run_suite(c);
  const Json j = r.to_json(c);
  ASSERT_EQ(j["results"].size(), 2u);
  EXPECT_EQ(j["results"][1]["body"], "ball|B_4");
  EXPECT_EQ(r.exit_code(), 0) << j["results"].dump();
}

TEST(Io, ScanTablesHaveHeaders) {
  const fs::path dir = scratch_dir("scan");
  QuadratureParams p;
  p.n_samples = 2000;
  const ScanReport s = kappa_intersection_scan(make_ball(2, 2), 4, p, 1);
  write_scan_tables(dir / "scan", s);
  const std::string csv = slurp(dir / "scan.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "index,direction,block_norms,value,std_error,numerical_error,negative");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(s.values.size() + 1));
  const std::string dat = slurp(dir / "scan.dat");
  EXPECT_EQ(dat.rfind("# index value", 0), 0u);
  fs::remove_all(dir);
}

TEST(Io, MissingFileIsIoError) { EXPECT_THROW(read_json_file("/nonexistent/file.json"), IoError); }
