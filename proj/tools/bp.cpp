// Command-line front end for the bplab suites.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bplab/harness.hpp"

namespace {

using namespace bplab;

void print_rows(const std::vector<ClassificationRow>& rows) {
  std::printf("%-6s %-3s %-12s %-22s %-22s %s\n", "kappa", "n", "answer", "evidence", "route", "details");
  for (const auto& r : rows)
    std::printf("%-6d %-3d %-12s %-22s %-22s %s\n", r.kappa, r.n, answer_name(r.answer).c_str(),
                evidence_name(r.evidence).c_str(), r.route.c_str(), r.details.c_str());
}

int classify_cmd(int max_n, const std::vector<int>& kappas, bool verify, std::uint64_t seed, const std::string& out) {
  ClassifyOptions opt;
  opt.max_n = max_n;
  opt.kappas = kappas;
  opt.verify = verify;
  const auto rows = classify(opt, seed);
  print_rows(rows);
  if (!out.empty()) {
    const std::filesystem::path dir(out);
    write_json_file(dir / "classification.json",
                    Json{{"seed", seed}, {"max_n", max_n}, {"kappas", kappas}, {"verify", verify},
                         {"rows", classification_to_json(rows)}});
    write_text_file(dir / "classification.csv", classification_table(rows).str());
  }
  for (const auto& r : rows)
    if (r.evidence == Evidence::VerificationFailed) return 2;
  return 0;
}

int scan_cmd(const std::string& body_file, int dirs, std::int64_t samples, std::uint64_t seed, const std::string& out) {
  const BodySpec body = body_from_json(read_json_file(body_file), body_file);
  QuadratureParams p;
  p.n_samples = samples;
  const ScanReport s = kappa_intersection_scan(body, dirs, p, seed);
  std::printf("body      %s\nroute     %s (exponent %g)\ndirs      %zu\nmin value %.6g\nmin z     %.3f\n"
              "witnesses %zu\n",
              s.body_id.c_str(), route_name(s.route).c_str(), s.exponent, s.values.size(), s.min_value, s.min_z,
              s.negative_witnesses.size());
  if (!out.empty()) {
    const std::filesystem::path dir(out);
    write_json_file(dir / "scan.json", scan_to_json(s));
    write_scan_tables(dir / "scan", s);
  }
  return 0;
}

int counterexample_cmd(int kappa, int n, double q, int dirs, std::uint64_t seed, const std::string& out) {
  CounterexampleOptions opt;
  opt.compare_dirs = dirs;
  const CounterexampleCertificate c = run_counterexample(kappa, n, q, opt, seed);
  const auto& r = c.comparison;
  std::printf("witnesses        %zu (clusters %zu)\nprofile degree   %d\nepsilon          %.6g (convex up to %.6g)\n"
              "sections leq     %.4f of %d\nvol_K - vol_L    %.6g +- %.3g\nverdict          %s\n",
              c.scan.negative_witnesses.size(), c.region.clusters.size(), c.design.degree, c.epsilon,
              c.convexity.epsilon, r.fraction_sections_leq, r.n_directions, r.vol_difference.value,
              r.vol_difference.sigma(), verdict_name(r.verdict).c_str());
  if (!out.empty()) write_json_file(std::filesystem::path(out) / "certificate.json", certificate_to_json(c));
  switch (r.verdict) {
    case Verdict::Reversal:
      return 0;
    case Verdict::NoReversal:
      return 2;
    case Verdict::Inconclusive:
      break;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-rotation-invariant Busemann-Petty laboratory"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out;

  auto* cl = app.add_subcommand("classify", "Answer table by (kappa, n), optionally verified numerically");
  int max_n = 5;
  std::vector<int> kappas{1, 2, 4};
  bool verify = false;
  cl->add_option("--max-n", max_n, "Largest number of blocks")->check(CLI::Range(2, 16));
  cl->add_option("--kappas", kappas, "Block sizes")->delimiter(',');
  cl->add_flag("--verify", verify, "Run the positivity scan or the counterexample pipeline per row");
  cl->add_option("--seed", seed, "Master seed");
  cl->add_option("--out", out, "Output directory for JSON and CSV");

  auto* rn = app.add_subcommand("run", "Run an experiment config");
  std::string config;
  rn->add_option("--config", config, "JSON config file")->required();
  std::string run_out;
  rn->add_option("--out", run_out, "Override the output directory");

  auto* sc = app.add_subcommand("scan", "kappa-intersection scan of one body");
  std::string body_file;
  int dirs = 256;
  std::int64_t samples = 20000;
  sc->add_option("--body", body_file, "Body JSON file")->required();
  sc->add_option("--dirs", dirs, "Low-discrepancy directions")->check(CLI::PositiveNumber);
  sc->add_option("--samples", samples, "Samples per direction")->check(CLI::PositiveNumber);
  sc->add_option("--seed", seed, "Seed");
  sc->add_option("--out", out, "Output directory for JSON, CSV and plot data");

  auto* ce = app.add_subcommand("counterexample", "Build and verify a Busemann-Petty reversal");
  int kappa = 2, n = 4, cdirs = 256;
  double q = 4.0;
  ce->add_option("--kappa", kappa, "Block size");
  ce->add_option("--n", n, "Number of blocks");
  ce->add_option("--q", q, "Exponent of the block q-ball (> 2)");
  ce->add_option("--dirs", cdirs, "Comparison directions")->check(CLI::PositiveNumber);
  ce->add_option("--seed", seed, "Seed");
  ce->add_option("--out", out, "Output directory for the certificate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every other parse problem is a usage error.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*cl) return classify_cmd(max_n, kappas, verify, seed, out);
    if (*sc) return scan_cmd(body_file, dirs, samples, seed, out);
    if (*ce) return counterexample_cmd(kappa, n, q, cdirs, seed, out);
    ExperimentConfig c = load_config(config);
    if (!run_out.empty()) c.out_dir = run_out;
    const int code = run(c);
    std::printf("%s: exit %d, report %s\n", suite_name(c.suite).c_str(), code,
                (c.out_dir / (c.name + ".json")).string().c_str());
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
