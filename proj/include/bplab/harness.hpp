#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bplab/body.hpp"
#include "bplab/checks.hpp"
#include "bplab/counterexample.hpp"
#include "bplab/fourier.hpp"
#include "bplab/integrate.hpp"
#include "bplab/io.hpp"

namespace bplab {

// ---------------------------------------------------------------------------
// Closed forms used as targets

/// Volume of the block q-ball: (|S^{kappa-1}| Gamma(kappa/q) / q)^n / Gamma(kappa n / q + 1).
inline double block_q_ball_volume(int kappa, int n, double q) {
  const double log_one = std::log(sphere_area(kappa)) + std::lgamma(kappa / q) - std::log(q);
  return std::exp(n * log_one - std::lgamma(kappa * n / q + 1.0));
}

/// Exact volume where one is known.
inline std::optional<double> exact_volume(const BodySpec& b) {
  const int N = b.dim();
  if (const auto* s = std::get_if<EuclideanBall>(&b.shape)) return std::pow(s->radius, N) * ball_volume(N);
  if (const auto* s = std::get_if<BlockQBall>(&b.shape)) return block_q_ball_volume(b.kappa, b.n, s->q);
  if (const auto* s = std::get_if<BlockNormBody>(&b.shape)) {
    if (s->delta != 0.0) return std::nullopt;
    double scale = 1.0;
    for (double w : s->weights) scale *= std::pow(w, -static_cast<double>(b.kappa) / s->p);
    return scale * block_q_ball_volume(b.kappa, b.n, s->p);
  }
  return std::nullopt;
}

/// Exact central section volume where one is known: any xi for the ball, a single-block
/// direction for the block q-ball (the section is the block q-ball with n - 1 blocks).
inline std::optional<double> exact_section(const BodySpec& b, const BlockVector& xi) {
  const int d = b.section_dim();
  if (const auto* s = std::get_if<EuclideanBall>(&b.shape)) return std::pow(s->radius, d) * ball_volume(d);
  if (const auto* s = std::get_if<BlockQBall>(&b.shape)) {
    int support = 0;
    for (int i = 0; i < b.n; ++i) support += xi.block_norm(i) > 1e-14;
    if (support == 1) return block_q_ball_volume(b.kappa, b.n - 1, s->q);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Fixture gallery

struct GalleryEntry {
  std::string name;
  BodySpec body;
};

/// Ball, B_q for q in {1, 1.5, 2, 3, 4}, one seeded random block-norm body and a ball
/// with a small bump (epsilon 1% of the admissible bound). All convex and invariant.
inline std::vector<GalleryEntry> fixture_gallery(int kappa, int n, std::uint64_t seed) {
  std::vector<GalleryEntry> g;
  g.push_back({"ball", make_ball(kappa, n)});
  for (double q : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    std::ostringstream os;
    os << "B_" << q;
    g.push_back({os.str(), make_block_q_ball(kappa, n, q)});
  }
  g.push_back({"random_block_norm", make_random_block_norm_body(kappa, n, derive_seed(seed, 0x9a11))});
  BlockNormBump bump{std::vector<double>(n, 1.0 / std::sqrt(static_cast<double>(n))), 0.5};
  g.push_back({"ball_with_bump", make_perturbed(make_ball(kappa, n), {bump}, 0.01)});
  return g;
}

// ---------------------------------------------------------------------------
// Classification

enum class Answer { Affirmative, Negative };
enum class Evidence { PositivityScanPassed, CounterexampleFound, NotRun, VerificationFailed };

inline std::string answer_name(Answer a) { return a == Answer::Affirmative ? "Affirmative" : "Negative"; }

inline std::string evidence_name(Evidence e) {
  switch (e) {
    case Evidence::PositivityScanPassed:
      return "PositivityScanPassed";
    case Evidence::CounterexampleFound:
      return "CounterexampleFound";
    case Evidence::NotRun:
      return "NotRun";
    case Evidence::VerificationFailed:
      break;
  }
  return "VerificationFailed";
}

/// Affirmative iff n = 2, or n = 3 and kappa <= 2, or n = 4 and kappa = 1.
inline Answer expected_answer(int kappa, int n) {
  if (n == 2 || (n == 3 && kappa <= 2) || (n == 4 && kappa == 1)) return Answer::Affirmative;
  return Answer::Negative;
}

struct ClassificationRow {
  int kappa = 1, n = 2;
  Answer answer = Answer::Affirmative;
  Evidence evidence = Evidence::NotRun;
  std::string route;    // Fourier route for the kappa-intersection test, empty when none
  std::string details;  // reason for NotRun, or a summary of the evidence
  Json report;          // evidence payload (scans or certificate), null when not verified
};

struct ClassifyOptions {
  int max_n = 5;
  std::vector<int> kappas{1, 2, 4};
  bool verify = false;
  int scan_dirs = 8;
  std::int64_t scan_samples = 20000;
  std::int64_t fractional_scan_samples = 2000;  // the fractional route costs ~50x a section
  double q = 4.0;                               // block q-ball behind each negative row
  CounterexampleOptions counterexample;
};

namespace detail {

inline QuadratureParams scan_params_for(const FtRoute& route, const ClassifyOptions& opt) {
  QuadratureParams p;
  p.n_samples = route.kind == RouteKind::Fractional ? opt.fractional_scan_samples : opt.scan_samples;
  return p;
}

inline void verify_affirmative(ClassificationRow& row, const FtRoute& route, const ClassifyOptions& opt,
                               std::uint64_t seed) {
  const QuadratureParams p = scan_params_for(route, opt);
  Json scans = Json::array();
  std::size_t witnesses = 0;
  double worst_z = std::numeric_limits<double>::infinity();
  const auto gallery = fixture_gallery(row.kappa, row.n, seed);
  for (std::size_t b = 0; b < gallery.size(); ++b) {
    const ScanReport s = kappa_intersection_scan(gallery[b].body, opt.scan_dirs, p, derive_seed(seed, b));
    witnesses += s.negative_witnesses.size();
    worst_z = std::min(worst_z, s.min_z);
    Json j = scan_to_json(s);
    j["fixture"] = gallery[b].name;
    scans.push_back(j);
  }
  row.report = Json{{"scans", scans}};
  std::ostringstream os;
  os << gallery.size() << " fixtures, " << witnesses << " negative witnesses, min z " << worst_z;
  row.details = os.str();
  row.evidence = witnesses == 0 ? Evidence::PositivityScanPassed : Evidence::VerificationFailed;
}

inline void verify_negative(ClassificationRow& row, const FtRoute& route, const ClassifyOptions& opt,
                            std::uint64_t seed) {
  CounterexampleOptions co = opt.counterexample;
  co.scan_params.n_samples = scan_params_for(route, opt).n_samples;
  const CounterexampleCertificate c = run_counterexample(row.kappa, row.n, opt.q, co, seed);
  row.report = certificate_to_json(c);
  std::ostringstream os;
  os << "B_" << opt.q << ": " << c.scan.negative_witnesses.size() << " witnesses, epsilon " << c.epsilon
     << ", sections leq " << c.comparison.fraction_sections_leq << ", volume gap z "
     << c.comparison.vol_difference.value / c.comparison.vol_difference.sigma() << ", verdict "
     << verdict_name(c.comparison.verdict);
  row.details = os.str();
  row.evidence = c.comparison.verdict == Verdict::Reversal ? Evidence::CounterexampleFound : Evidence::VerificationFailed;
}

}  // namespace detail

/// One row per kappa in opt.kappas and 2 <= n <= opt.max_n. With verify, affirmative rows
/// run the positivity scan on the fixture gallery and negative rows the counterexample pipeline.
inline std::vector<ClassificationRow> classify(const ClassifyOptions& opt, std::uint64_t seed) {
  if (opt.max_n < 2) throw InvalidArgument("classify: max_n must be >= 2");
  std::vector<ClassificationRow> rows;
  for (int kappa : opt.kappas) {
    if (kappa < 1) throw InvalidArgument("classify: kappa must be positive");
    for (int n = 2; n <= opt.max_n; ++n) {
      ClassificationRow row;
      row.kappa = kappa;
      row.n = n;
      row.answer = expected_answer(kappa, n);
      FtRoute route;
      try {
        route = route_for_pair(kappa, n);
        row.route = route_name(route);
      } catch (const UnsupportedKappa&) {
        row.details = "no Hurwitz-Radon family: block rotations need kappa in {1, 2, 4, 8}";
        rows.push_back(std::move(row));
        continue;
      } catch (const UnsupportedCase&) {
        row.details = "q = kappa (n - 2) = " + std::to_string(kappa * (n - 2)) + " > 4 has no Fourier route";
        rows.push_back(std::move(row));
        continue;
      }
      if (!opt.verify) {
        row.details = "not verified";
      } else {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(kappa) * 64 + n);
        try {
          if (row.answer == Answer::Affirmative)
            detail::verify_affirmative(row, route, opt, s);
          else
            detail::verify_negative(row, route, opt, s);
        } catch (const Error& e) {
          row.evidence = Evidence::VerificationFailed;
          row.details = e.what();
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline Json classification_to_json(const std::vector<ClassificationRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows)
    out.push_back(Json{{"kappa", r.kappa},
                       {"n", r.n},
                       {"paper_answer", answer_name(r.answer)},
                       {"numerical_evidence", evidence_name(r.evidence)},
                       {"route", r.route},
                       {"details", r.details},
                       {"evidence", r.report}});
  return out;
}

inline CsvTable classification_table(const std::vector<ClassificationRow>& rows) {
  CsvTable t({"kappa", "n", "paper_answer", "numerical_evidence", "route", "details"});
  for (const auto& r : rows) {
    std::string d = r.details;
    std::replace(d.begin(), d.end(), ',', ';');
    t.add({std::to_string(r.kappa), std::to_string(r.n), answer_name(r.answer), evidence_name(r.evidence), r.route, d});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Experiment configuration

enum class Suite { Volume, Section, FtScan, Parseval, Brunn, Counterexample, Classify };

inline std::string suite_name(Suite s) {
  switch (s) {
    case Suite::Volume:
      return "volume";
    case Suite::Section:
      return "section";
    case Suite::FtScan:
      return "ft-scan";
    case Suite::Parseval:
      return "parseval";
    case Suite::Brunn:
      return "brunn";
    case Suite::Counterexample:
      return "counterexample";
    case Suite::Classify:
      break;
  }
  return "classify";
}

inline Suite parse_suite(const std::string& s, const std::string& path = "/suite") {
  for (Suite v : {Suite::Volume, Suite::Section, Suite::FtScan, Suite::Parseval, Suite::Brunn, Suite::Counterexample,
                  Suite::Classify})
    if (suite_name(v) == s) return v;
  throw ConfigError(path + ": unknown suite '" + s +
                    "' (expected volume, section, ft-scan, parseval, brunn, counterexample or classify)");
}

struct Tolerances {
  double sigma = 3.0;          // statistical gate in combined standard errors
  double parseval_rel = 0.05;  // relative error bound of the Parseval suite
};

struct ExperimentConfig {
  Suite suite = Suite::Volume;
  int kappa = 2, n = 3;
  std::uint64_t seed = 0;
  std::vector<GalleryEntry> bodies;  // empty: the fixture gallery
  QuadratureParams params;
  int n_dirs = 0;                    // 0: the suite default
  std::vector<double> frac_qs{0.5, 1.0, 1.5};
  double parseval_p = 0.0;           // 0: p = kappa
  std::vector<std::pair<int, int>> pairs;  // parseval body index pairs; empty: default pairs
  int probe_xi = 0, probe_eta = 8;   // section suite constancy probe, off when probe_xi = 0
  Tolerances tol;
  double q = 4.0;                    // counterexample block q-ball
  CounterexampleOptions counterexample;
  ClassifyOptions classify;
  std::filesystem::path out_dir = "bp_out";
  std::string name = "report";
};

inline int default_dirs(Suite s) {
  switch (s) {
    case Suite::Section:
      return 8;
    case Suite::FtScan:
      return 16;
    case Suite::Parseval:
      return 64;
    case Suite::Brunn:
      return 2;
    case Suite::Counterexample:
      return 256;
    default:
      return 0;
  }
}

inline std::vector<GalleryEntry> config_bodies(const ExperimentConfig& c) {
  return c.bodies.empty() ? fixture_gallery(c.kappa, c.n, c.seed) : c.bodies;
}

/// Parses and validates a config document; `base` resolves relative "file" body references.
inline ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base = ".") {
  if (!j.is_object()) throw ConfigError(": config must be a JSON object");
  ExperimentConfig c;
  const Json& suite = detail::require(j, "suite", "");
  if (!suite.is_string()) throw ConfigError("/suite: expected a string");
  c.suite = parse_suite(suite.get<std::string>());
  const std::int64_t seed = detail::integer_at(j, "seed", "");
  if (seed < 0) throw ConfigError("/seed: expected a nonnegative integer");
  c.seed = static_cast<std::uint64_t>(seed);

  if (c.suite == Suite::Classify) {
    const Json cl = j.contains("classify") ? j["classify"] : Json::object();
    c.classify.max_n = static_cast<int>(detail::integer_or(cl, "max_n", c.classify.max_n, "/classify"));
    if (cl.contains("kappas")) {
      c.classify.kappas.clear();
      for (double k : detail::numbers_at(cl, "kappas", "/classify")) c.classify.kappas.push_back(static_cast<int>(k));
    }
    if (cl.contains("verify")) {
      if (!cl["verify"].is_boolean()) throw ConfigError("/classify/verify: expected a boolean");
      c.classify.verify = cl["verify"].get<bool>();
    }
    c.classify.scan_dirs = static_cast<int>(detail::integer_or(cl, "scan_dirs", c.classify.scan_dirs, "/classify"));
  } else {
    c.kappa = static_cast<int>(detail::integer_at(j, "kappa", ""));
    c.n = static_cast<int>(detail::integer_at(j, "n", ""));
    try {
      route_for_pair(c.kappa, c.n);
    } catch (const Error& e) {
      throw ConfigError(std::string("/kappa, /n: ") + e.what());
    }
  }

  if (j.contains("bodies")) {
    const Json& bodies = j["bodies"];
    if (!bodies.is_array()) throw ConfigError("/bodies: expected an array");
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      const std::string path = "/bodies/" + std::to_string(i);
      Json spec = bodies[i];
      std::string name = spec.is_object() && spec.contains("name") && spec["name"].is_string()
                             ? spec["name"].get<std::string>()
                             : "body" + std::to_string(i);
      if (spec.is_object() && spec.contains("file")) {
        if (!spec["file"].is_string()) throw ConfigError(path + "/file: expected a path");
        spec = read_json_file((base / spec["file"].get<std::string>()).string());
      }
      BodySpec b = body_from_json(spec, path, c.kappa, c.n);
      if (b.kappa != c.kappa || b.n != c.n)
        throw ConfigError(path + ": body lives in R^" + std::to_string(b.dim()) + " (kappa=" + std::to_string(b.kappa) +
                          ", n=" + std::to_string(b.n) + "), config expects kappa=" + std::to_string(c.kappa) +
                          ", n=" + std::to_string(c.n));
      c.bodies.push_back({name, std::move(b)});
    }
  }

  c.params = params_from_json(j.contains("quadrature") ? j["quadrature"] : Json(), c.params, "/quadrature");
  c.n_dirs = static_cast<int>(detail::integer_or(j, "n_dirs", 0, ""));
  if (c.n_dirs < 0) throw ConfigError("/n_dirs: expected a nonnegative integer");
  if (j.contains("frac_qs")) c.frac_qs = detail::numbers_at(j, "frac_qs", "");
  for (std::size_t i = 0; i < c.frac_qs.size(); ++i) {
    const double q = c.frac_qs[i];
    if (!(q >= 1e-3 && q <= 4.0 - 1e-3) || std::abs(q - 2.0) < 1e-3)
      throw ConfigError("/frac_qs/" + std::to_string(i) + ": q must lie in (0, 2) or (2, 4)");
  }
  c.parseval_p = detail::number_or(j, "p", 0.0, "");
  if (j.contains("pairs")) {
    const Json& pairs = j["pairs"];
    if (!pairs.is_array()) throw ConfigError("/pairs: expected an array of [i, j] index pairs");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string path = "/pairs/" + std::to_string(i);
      if (!pairs[i].is_array() || pairs[i].size() != 2 || !pairs[i][0].is_number_integer() ||
          !pairs[i][1].is_number_integer())
        throw ConfigError(path + ": expected [i, j]");
      c.pairs.emplace_back(pairs[i][0].get<int>(), pairs[i][1].get<int>());
    }
  }
  if (j.contains("constancy_probe")) {
    const Json& p = j["constancy_probe"];
    c.probe_xi = static_cast<int>(detail::integer_or(p, "n_xi", 20, "/constancy_probe"));
    c.probe_eta = static_cast<int>(detail::integer_or(p, "n_eta", 8, "/constancy_probe"));
  }
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    c.tol.sigma = detail::number_or(t, "sigma", c.tol.sigma, "/tolerances");
    c.tol.parseval_rel = detail::number_or(t, "parseval_rel", c.tol.parseval_rel, "/tolerances");
    if (!(c.tol.sigma > 0.0)) throw ConfigError("/tolerances/sigma: expected a positive number");
    if (!(c.tol.parseval_rel > 0.0)) throw ConfigError("/tolerances/parseval_rel: expected a positive number");
  }
  if (j.contains("counterexample")) {
    const Json& ce = j["counterexample"];
    const std::string p = "/counterexample";
    c.q = detail::number_or(ce, "q", c.q, p);
    auto& o = c.counterexample;
    o.scan_dirs = static_cast<int>(detail::integer_or(ce, "scan_dirs", o.scan_dirs, p));
    o.scan_params.n_samples = detail::integer_or(ce, "scan_samples", o.scan_params.n_samples, p);
    o.delta = detail::number_or(ce, "delta", o.delta, p);
    o.floor_fraction = detail::number_or(ce, "floor_fraction", o.floor_fraction, p);
    o.epsilon_fraction = detail::number_or(ce, "epsilon_fraction", o.epsilon_fraction, p);
    o.convexity_pairs = detail::integer_or(ce, "convexity_pairs", o.convexity_pairs, p);
    o.compare.section_samples = detail::integer_or(ce, "section_samples", o.compare.section_samples, p);
    o.compare.volume_samples = detail::integer_or(ce, "volume_samples", o.compare.volume_samples, p);
    if (!(c.q > 2.0)) throw ConfigError(p + "/q: the counterexample needs q > 2");
    if (!(o.epsilon_fraction > 0.0 && o.epsilon_fraction < 1.0))
      throw ConfigError(p + "/epsilon_fraction: expected a value in (0, 1)");
  }
  if (c.suite == Suite::Counterexample && c.n_dirs > 0) c.counterexample.compare_dirs = c.n_dirs;
  c.classify.counterexample = c.counterexample;
  c.classify.q = c.q;

  if (j.contains("output")) {
    const Json& o = j["output"];
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) throw ConfigError("/output/dir: expected a string");
      c.out_dir = o["dir"].get<std::string>();
    }
    if (o.contains("name")) {
      if (!o["name"].is_string()) throw ConfigError("/output/name: expected a string");
      c.name = o["name"].get<std::string>();
    }
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& file) {
  const std::filesystem::path p(file);
  return config_from_json(read_json_file(file), p.has_parent_path() ? p.parent_path() : ".");
}

// ---------------------------------------------------------------------------
// Suites

enum class Status { Pass, Fail, Inconclusive, Info };

inline std::string status_name(Status s) {
  switch (s) {
    case Status::Pass:
      return "pass";
    case Status::Fail:
      return "fail";
    case Status::Inconclusive:
      return "inconclusive";
    case Status::Info:
      break;
  }
  return "info";
}

/// Report of one suite run: JSON document, a flat CSV table and two-column plot data.
class SuiteReport {
 public:
  SuiteReport()
      : table_({"body", "item", "quantity", "value", "std_error", "numerical_error", "target", "status"}) {}

  void record(const std::string& body, const std::string& item, const std::string& quantity, const Estimate& e,
              std::optional<double> target, Status s, Json extra = Json::object()) {
    counts_[static_cast<int>(s)]++;
    Json row{{"body", body},
             {"item", item},
             {"quantity", quantity},
             {"estimate", estimate_to_json(e)},
             {"target", target ? Json(*target) : Json()},
             {"status", status_name(s)}};
    for (auto& [k, v] : extra.items()) row[k] = v;
    rows_.push_back(row);
    table_.add({body, item, quantity, format_double(e.value), format_double(e.std_error),
                format_double(e.numerical_error), target ? format_double(*target) : "", status_name(s)});
    dat_ << plot_index_++ << " " << format_double(e.value) << "\n";
  }

  void attach(const std::string& key, Json value) { attachments_[key] = std::move(value); }

  /// 2 on any failure, 3 on inconclusive results without failures, 0 otherwise.
  int exit_code() const {
    if (counts_[static_cast<int>(Status::Fail)] > 0) return 2;
    if (counts_[static_cast<int>(Status::Inconclusive)] > 0) return 3;
    return 0;
  }

  Json to_json(const ExperimentConfig& c) const {
    Json j;
    j["suite"] = suite_name(c.suite);
    if (c.suite != Suite::Classify) {
      j["kappa"] = c.kappa;
      j["n"] = c.n;
    }
    j["seed"] = c.seed;
    j["quadrature"] = params_to_json(c.params);
    j["tolerances"] = {{"sigma", c.tol.sigma}, {"parseval_rel", c.tol.parseval_rel}};
    j["results"] = rows_;
    for (const auto& [k, v] : attachments_.items()) j[k] = v;
    j["summary"] = {{"pass", counts_[0]}, {"fail", counts_[1]}, {"inconclusive", counts_[2]}, {"info", counts_[3]}};
    j["exit_code"] = exit_code();
    return j;
  }

  const CsvTable& table() const { return table_; }
  std::string dat() const { return "# index value\n" + dat_.str(); }
  void set_table(CsvTable t) { table_ = std::move(t); }

 private:
  Json rows_ = Json::array();
  Json attachments_ = Json::object();
  CsvTable table_;
  std::ostringstream dat_;
  int plot_index_ = 0;
  int counts_[4] = {0, 0, 0, 0};
};

namespace detail {

inline Status gate(const Estimate& e, std::optional<double> target, double k) {
  if (!target) return Status::Info;
  return within_sigma(e, *target, k) ? Status::Pass : Status::Fail;
}

inline std::string dir_label(std::size_t j) { return "xi" + std::to_string(j); }

inline void run_volume(const ExperimentConfig& c, SuiteReport& r) {
  const auto bodies = config_bodies(c);
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    const Estimate e = body_volume_polar(bodies[b].body, c.params, derive_seed(c.seed, b));
    const auto target = exact_volume(bodies[b].body);
    r.record(bodies[b].name, "volume", "volume", e, target, gate(e, target, c.tol.sigma),
             {{"body_spec", body_to_json(bodies[b].body)}});
  }
}

inline void run_section(const ExperimentConfig& c, SuiteReport& r) {
  const auto bodies = config_bodies(c);
  const auto dirs = scan_directions(c.kappa, c.n, c.n_dirs ? c.n_dirs : default_dirs(c.suite), c.seed);
  const RotationFamily fam = hurwitz_radon_family(c.kappa);
  Json probes = Json::array();
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      const Estimate e =
          section_volume(bodies[b].body, section_frame(dirs[j], fam), c.params, derive_seed(c.seed, b * 4096 + j));
      const auto target = exact_section(bodies[b].body, dirs[j]);
      r.record(bodies[b].name, dir_label(j), "section_volume", e, target, gate(e, target, c.tol.sigma),
               {{"xi", dirs[j].vec()}});
    }
    if (c.probe_xi > 0 && is_block_norm_body(bodies[b].body)) {
      const ConstancyProbe p =
          constancy_probe(bodies[b].body, c.probe_xi, c.probe_eta, c.params, derive_seed(c.seed, 0x1c + b));
      // Asserted for kappa <= 2, reported for larger kappa.
      const Status s = c.kappa <= 2 ? (p.max_z <= c.tol.sigma ? Status::Pass : Status::Fail) : Status::Info;
      Estimate z;
      z.value = p.max_z;
      r.record(bodies[b].name, "constancy", "max_z", z, std::nullopt, s,
               {{"max_rel_dev", p.max_rel_dev}, {"n_xi", p.n_xi}, {"n_eta", p.n_eta}, {"pass", p.max_z <= c.tol.sigma}});
    }
  }
}

inline void run_ft_scan(const ExperimentConfig& c, SuiteReport& r) {
  const auto bodies = config_bodies(c);
  const bool affirmative = expected_answer(c.kappa, c.n) == Answer::Affirmative;
  Json scans = Json::array();
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    const ScanReport s =
        kappa_intersection_scan(bodies[b].body, c.n_dirs ? c.n_dirs : default_dirs(c.suite), c.params,
                                derive_seed(c.seed, b));
    for (std::size_t j = 0; j < s.values.size(); ++j) {
      const Estimate& e = s.values[j].value;
      const bool negative = e.value < -c.tol.sigma * e.sigma();
      // Positivity is forced only for convex invariant bodies in the affirmative cases.
      const bool forced = affirmative && is_block_norm_body(bodies[b].body);
      const Status st = forced ? (negative ? Status::Fail : Status::Pass) : Status::Info;
      r.record(bodies[b].name, dir_label(j), "ft_kappa", e, std::nullopt, st,
               {{"xi", s.values[j].xi.vec()}, {"negative", negative}});
    }
    Json sj = scan_to_json(s);
    sj["fixture"] = bodies[b].name;
    sj.erase("values");
    scans.push_back(sj);
  }
  r.attach("scans", scans);
  r.attach("paper_answer", answer_name(expected_answer(c.kappa, c.n)));
}

inline void run_parseval(const ExperimentConfig& c, SuiteReport& r) {
  const auto bodies = config_bodies(c);
  std::vector<std::pair<int, int>> pairs = c.pairs;
  if (pairs.empty()) {
    if (c.bodies.empty()) {
      pairs = {{0, 0}, {0, 5}};  // (ball, ball), (ball, B_4)
    } else {
      for (std::size_t j = 0; j < bodies.size(); ++j) pairs.emplace_back(0, static_cast<int>(j));
    }
  }
  const double p = c.parseval_p > 0.0 ? c.parseval_p : c.kappa;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [a, b] = pairs[i];
    if (a < 0 || b < 0 || a >= static_cast<int>(bodies.size()) || b >= static_cast<int>(bodies.size()))
      throw ConfigError("/pairs/" + std::to_string(i) + ": body index out of range");
    const ParsevalResult res = parseval_check(bodies[a].body, bodies[b].body, p,
                                              c.n_dirs ? c.n_dirs : default_dirs(c.suite), c.params,
                                              derive_seed(c.seed, i));
    const Status st = res.rel_error <= c.tol.parseval_rel ? Status::Pass : Status::Fail;
    r.record(bodies[a].name + "|" + bodies[b].name, "pair" + std::to_string(i), "parseval_lhs", res.lhs, res.rhs.value,
             st, {{"rhs", estimate_to_json(res.rhs)}, {"rel_error", res.rel_error}, {"p", p}});
  }
}

inline void run_brunn(const ExperimentConfig& c, SuiteReport& r) {
  const auto bodies = config_bodies(c);
  const auto dirs = scan_directions(c.kappa, c.n, c.n_dirs ? c.n_dirs : default_dirs(c.suite), c.seed);
  const RotationFamily fam = hurwitz_radon_family(c.kappa);
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    const BodySpec& body = bodies[b].body;
    if (!c.bodies.empty()) {
      const ConvexityReport cv = check_convexity(body, 20000, derive_seed(c.seed, 0xc0 + b));
      if (cv.violations > 0) {
        Estimate m;
        m.value = cv.worst_margin;
        r.record(bodies[b].name, "convexity", "skipped_nonconvex", m, std::nullopt, Status::Info,
                 {{"violations", cv.violations}});
        continue;
      }
    }
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      const SubspaceFrame f = section_frame(dirs[j], fam);
      const std::uint64_t s = derive_seed(c.seed, b * 4096 + j);
      const Estimate lap = laplacian_A_at_zero(body, f, 1, c.params, s);
      Status st = lap.value <= c.tol.sigma * lap.sigma() ? Status::Pass : Status::Fail;
      r.record(bodies[b].name, dir_label(j), "laplacian_A0", lap, std::nullopt, st, {{"xi", dirs[j].vec()}});
      const auto fr = frac_action_multi(body, f, c.frac_qs, c.params, derive_seed(s, 1));
      for (std::size_t k = 0; k < fr.size(); ++k) {
        st = fr[k].value >= -c.tol.sigma * fr[k].sigma() ? Status::Pass : Status::Fail;
        std::ostringstream q;
        q << "frac_action(q=" << c.frac_qs[k] << ")";
        r.record(bodies[b].name, dir_label(j), q.str(), fr[k], std::nullopt, st, {{"xi", dirs[j].vec()}});
      }
    }
  }
}

inline void run_counterexample_suite(const ExperimentConfig& c, SuiteReport& r) {
  const CounterexampleCertificate cert = run_counterexample(c.kappa, c.n, c.q, c.counterexample, c.seed);
  CsvTable t({"index", "xi", "section_K", "section_L", "difference", "sigma", "leq"});
  std::ostringstream dat;
  const auto& cmp = cert.comparison;
  for (std::size_t j = 0; j < cmp.sections.size(); ++j) {
    const auto& s = cmp.sections[j];
    std::string xi;
    for (std::size_t i = 0; i < s.xi.vec().size(); ++i) xi += (i ? " " : "") + format_double(s.xi[i]);
    t.add({std::to_string(j), xi, format_double(s.section_K.value), format_double(s.section_L.value),
           format_double(s.difference.value), format_double(s.difference.sigma()), s.leq ? "1" : "0"});
  }
  const Status st = cmp.verdict == Verdict::Reversal     ? Status::Pass
                    : cmp.verdict == Verdict::NoReversal ? Status::Fail
                                                         : Status::Inconclusive;
  r.record("K|L", "volume", "vol_K-vol_L", cmp.vol_difference, std::nullopt, st,
           {{"verdict", verdict_name(cmp.verdict)}, {"fraction_sections_leq", cmp.fraction_sections_leq}});
  r.attach("certificate", certificate_to_json(cert));
  r.set_table(std::move(t));
}

inline void run_classify_suite(const ExperimentConfig& c, SuiteReport& r) {
  const auto rows = classify(c.classify, c.seed);
  for (const auto& row : rows) {
    Status st = Status::Info;
    if (c.classify.verify && row.evidence != Evidence::NotRun)
      st = row.evidence == Evidence::VerificationFailed ? Status::Fail : Status::Pass;
    Estimate none;
    r.record("kappa=" + std::to_string(row.kappa) + ",n=" + std::to_string(row.n), answer_name(row.answer),
             evidence_name(row.evidence), none, std::nullopt, st, {{"details", row.details}});
  }
  r.attach("classification", classification_to_json(rows));
  r.set_table(classification_table(rows));
}

}  // namespace detail

/// Runs one suite without touching the filesystem.
inline SuiteReport run_suite(const ExperimentConfig& c) {
  SuiteReport r;
  switch (c.suite) {
    case Suite::Volume:
      detail::run_volume(c, r);
      break;
    case Suite::Section:
      detail::run_section(c, r);
      break;
    case Suite::FtScan:
      detail::run_ft_scan(c, r);
      break;
    case Suite::Parseval:
      detail::run_parseval(c, r);
      break;
    case Suite::Brunn:
      detail::run_brunn(c, r);
      break;
    case Suite::Counterexample:
      detail::run_counterexample_suite(c, r);
      break;
    case Suite::Classify:
      detail::run_classify_suite(c, r);
      break;
  }
  return r;
}

/// Writes <out_dir>/<name>.json, .csv and .dat; returns 0 pass, 2 failure, 3 inconclusive.
inline int run(const ExperimentConfig& c) {
  const SuiteReport r = run_suite(c);
  const std::filesystem::path stem = c.out_dir / c.name;
  write_json_file(stem.string() + ".json", r.to_json(c));
  write_text_file(stem.string() + ".csv", r.table().str());
  write_text_file(stem.string() + ".dat", r.dat());
  return r.exit_code();
}

}  // namespace bplab
