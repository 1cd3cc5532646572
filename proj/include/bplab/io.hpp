#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bplab/body.hpp"
#include "bplab/counterexample.hpp"
#include "bplab/estimate.hpp"
#include "bplab/fourier.hpp"

namespace bplab {

using Json = nlohmann::ordered_json;

class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "/" + key + ": required field is missing");
  return *it;
}

inline double number_at(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_number()) throw ConfigError(path + "/" + key + ": expected a number");
  return v.get<double>();
}

inline double number_or(const Json& j, const std::string& key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  return number_at(j, key, path);
}

inline std::int64_t integer_at(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_number_integer()) throw ConfigError(path + "/" + key + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::int64_t integer_or(const Json& j, const std::string& key, std::int64_t fallback,
                               const std::string& path) {
  if (!j.contains(key)) return fallback;
  return integer_at(j, key, path);
}

inline std::vector<double> numbers_at(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_array()) throw ConfigError(path + "/" + key + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(path + "/" + key + "/" + std::to_string(i) + ": expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

// Library validation errors surface as ConfigError carrying the JSON path.
template <class Fn>
auto at_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace detail

inline PerturbationProfile profile_from_json(const Json& j, const std::string& path = "") {
  const Json& name = detail::require(j, "name", path);
  if (!name.is_string()) throw ConfigError(path + "/name: expected a string");
  if (name == "block_norm_bump") {
    BlockNormBump b;
    b.center = detail::numbers_at(j, "center", path);
    b.width = detail::number_or(j, "width", 0.4, path);
    return {b};
  }
  if (name == "block_norm_polynomial") {
    const Json& terms = detail::require(j, "terms", path);
    if (!terms.is_array()) throw ConfigError(path + "/terms: expected an array");
    BlockNormPolynomial p;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string tp = path + "/terms/" + std::to_string(i);
      BlockNormPolynomial::Term t;
      for (double e : detail::numbers_at(terms[i], "exponents", tp)) {
        if (e != std::floor(e) || e < 0) throw ConfigError(tp + "/exponents: expected nonnegative integers");
        t.exponents.push_back(static_cast<int>(e));
      }
      t.coeff = detail::number_at(terms[i], "coeff", tp);
      p.terms.push_back(std::move(t));
    }
    return {p};
  }
  throw ConfigError(path + "/name: unknown profile '" + name.get<std::string>() +
                    "' (expected block_norm_bump or block_norm_polynomial)");
}

inline Json profile_to_json(const PerturbationProfile& p) {
  Json j;
  j["name"] = profile_name(p);
  if (const auto* b = std::get_if<BlockNormBump>(&p.shape)) {
    j["center"] = b->center;
    j["width"] = b->width;
  } else {
    Json terms = Json::array();
    for (const auto& t : std::get<BlockNormPolynomial>(p.shape).terms)
      terms.push_back(Json{{"exponents", t.exponents}, {"coeff", t.coeff}});
    j["terms"] = terms;
  }
  return j;
}

/// Body from {"kind": ..., "kappa": ..., "n": ..., <shape fields>}. A perturbed body's
/// base inherits kappa and n when it omits them.
inline BodySpec body_from_json(const Json& j, const std::string& path = "", int kappa_default = 0,
                               int n_default = 0) {
  if (!j.is_object()) throw ConfigError(path + ": expected a body object");
  const Json& kind = detail::require(j, "kind", path);
  if (!kind.is_string()) throw ConfigError(path + "/kind: expected a string");
  BodySpec b;
  b.kappa = static_cast<int>(kappa_default ? detail::integer_or(j, "kappa", kappa_default, path)
                                           : detail::integer_at(j, "kappa", path));
  b.n = static_cast<int>(n_default ? detail::integer_or(j, "n", n_default, path) : detail::integer_at(j, "n", path));
  const std::string k = kind.get<std::string>();
  if (k == "euclidean_ball") {
    b.shape = EuclideanBall{detail::number_or(j, "radius", 1.0, path)};
  } else if (k == "block_q_ball") {
    b.shape = BlockQBall{detail::number_at(j, "q", path)};
  } else if (k == "block_norm_body") {
    b.shape = BlockNormBody{detail::number_at(j, "p", path), detail::numbers_at(j, "weights", path),
                            detail::number_or(j, "delta", 0.0, path)};
  } else if (k == "axis_weighted_q_ball") {
    b.shape = AxisWeightedQBall{detail::number_at(j, "q", path), detail::numbers_at(j, "weights", path)};
  } else if (k == "perturbed_body") {
    const BodySpec base = body_from_json(detail::require(j, "base", path), path + "/base", b.kappa, b.n);
    const PerturbationProfile prof = profile_from_json(detail::require(j, "profile", path), path + "/profile");
    const double eps = detail::number_at(j, "epsilon", path);
    return detail::at_path(path, [&] { return make_perturbed(base, prof, eps); });
  } else {
    throw ConfigError(path + "/kind: unknown body kind '" + k + "'");
  }
  detail::at_path(path, [&] {
    validate_body(b);
    return 0;
  });
  return b;
}

inline Json body_to_json(const BodySpec& b) {
  Json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EuclideanBall>) {
          j["kind"] = "euclidean_ball";
          j["kappa"] = b.kappa;
          j["n"] = b.n;
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<T, BlockQBall>) {
          j["kind"] = "block_q_ball";
          j["kappa"] = b.kappa;
          j["n"] = b.n;
          j["q"] = s.q;
        } else if constexpr (std::is_same_v<T, BlockNormBody>) {
          j["kind"] = "block_norm_body";
          j["kappa"] = b.kappa;
          j["n"] = b.n;
          j["p"] = s.p;
          j["weights"] = s.weights;
          j["delta"] = s.delta;
        } else if constexpr (std::is_same_v<T, AxisWeightedQBall>) {
          j["kind"] = "axis_weighted_q_ball";
          j["kappa"] = b.kappa;
          j["n"] = b.n;
          j["q"] = s.q;
          j["weights"] = s.weights;
        } else {
          j["kind"] = "perturbed_body";
          j["kappa"] = b.kappa;
          j["n"] = b.n;
          j["base"] = body_to_json(*s.base);
          j["epsilon"] = s.epsilon;
          j["profile"] = profile_to_json(s.profile);
        }
      },
      b.shape);
  return j;
}

inline QuadratureParams params_from_json(const Json& j, const QuadratureParams& defaults, const std::string& path) {
  QuadratureParams p = defaults;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  p.n_samples = detail::integer_or(j, "n_samples", p.n_samples, path);
  p.fd_step = detail::number_or(j, "fd_step", p.fd_step, path);
  p.bisect_tol = detail::number_or(j, "bisect_tol", p.bisect_tol, path);
  if (j.contains("t_grid")) {
    const Json& g = j["t_grid"];
    const std::string gp = path + "/t_grid";
    p.t_grid.t_min = detail::number_or(g, "t_min", p.t_grid.t_min, gp);
    p.t_grid.t_max = detail::number_or(g, "t_max", p.t_grid.t_max, gp);
    p.t_grid.points = static_cast<int>(detail::integer_or(g, "points", p.t_grid.points, gp));
  }
  detail::at_path(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

inline Json params_to_json(const QuadratureParams& p) {
  return Json{{"n_samples", p.n_samples},
              {"t_grid", {{"t_min", p.t_grid.t_min}, {"t_max", p.t_grid.t_max}, {"points", p.t_grid.points}}},
              {"fd_step", p.fd_step},
              {"bisect_tol", p.bisect_tol}};
}

inline Json estimate_to_json(const Estimate& e) {
  return Json{{"value", e.value},
              {"std_error", e.std_error},
              {"numerical_error", e.numerical_error},
              {"n_samples", e.n_samples},
              {"seed", e.seed},
              {"inconclusive", e.inconclusive}};
}

inline Json ft_value_to_json(const FtValue& v) {
  return Json{{"xi", v.xi.vec()},
              {"block_norms", v.xi.block_norms()},
              {"exponent", v.exponent},
              {"route", route_name(v.route)},
              {"value", estimate_to_json(v.value)}};
}

inline Json scan_to_json(const ScanReport& r) {
  Json values = Json::array();
  for (const auto& v : r.values) values.push_back(ft_value_to_json(v));
  return Json{{"body", r.body_id},
              {"exponent", r.exponent},
              {"route", route_name(r.route)},
              {"n_directions", r.directions.size()},
              {"min_value", r.min_value},
              {"min_z", r.min_z},
              {"negative_witnesses", r.negative_witnesses},
              {"inconclusive", r.inconclusive},
              {"values", values}};
}

inline Json comparison_to_json(const BpComparisonReport& r) {
  Json sections = Json::array();
  for (const auto& s : r.sections)
    sections.push_back(Json{{"xi", s.xi.vec()},
                            {"section_K", estimate_to_json(s.section_K)},
                            {"section_L", estimate_to_json(s.section_L)},
                            {"difference", estimate_to_json(s.difference)},
                            {"leq", s.leq}});
  return Json{{"n_directions", r.n_directions},
              {"fraction_sections_leq", r.fraction_sections_leq},
              {"max_section_z", r.max_section_z},
              {"vol_K", estimate_to_json(r.vol_K)},
              {"vol_L", estimate_to_json(r.vol_L)},
              {"vol_difference", estimate_to_json(r.vol_difference)},
              {"verdict", verdict_name(r.verdict)},
              {"sections", sections}};
}

inline Json certificate_to_json(const CounterexampleCertificate& c) {
  Json clusters = Json::array();
  for (const auto& cl : c.region.clusters)
    clusters.push_back(Json{{"profile", cl.profile}, {"members", cl.members}, {"worst_z", cl.worst_z}});
  Json cands = Json::array();
  for (const auto& d : c.design.candidates)
    cands.push_back(Json{{"degree", d.degree},
                         {"residual", d.residual},
                         {"min_singular", d.min_singular},
                         {"objective", estimate_to_json(d.objective)},
                         {"floor", d.floor},
                         {"per_sample_snr", d.per_sample_snr}});
  Json trail = Json::array();
  for (const auto& s : c.convexity.trail)
    trail.push_back(Json{{"epsilon", s.epsilon}, {"violations", s.violations}, {"worst_margin", s.worst_margin}});
  return Json{
      {"kappa", c.kappa},
      {"n", c.n},
      {"q", c.q},
      {"seed", c.seed},
      {"construction", "signed block-norm polynomial h = R^{-1} g, verified a posteriori"},
      {"scan", scan_to_json(c.scan)},
      {"witness_region", {{"clusters", clusters}}},
      {"L_scan", body_to_json(c.L_scan)},
      {"L", body_to_json(c.L)},
      {"design",
       {{"center", c.design.center}, {"degree", c.design.degree}, {"beta", c.design.beta}, {"candidates", cands}}},
      {"convexity_search",
       {{"epsilon_max", c.convexity.epsilon},
        {"epsilon_star", c.convexity.epsilon_star},
        {"seed", c.convexity.seed},
        {"n_pairs", c.convexity.n_pairs},
        {"trail", trail}}},
      {"epsilon", c.epsilon},
      {"K", body_to_json(c.K)},
      {"invariance_K", c.invariance_K},
      {"convexity_K", {{"violations", c.convexity_K.violations}, {"worst_margin", c.convexity_K.worst_margin}}},
      {"convexity_L", {{"violations", c.convexity_L.violations}, {"worst_margin", c.convexity_L.worst_margin}}},
      {"comparison", comparison_to_json(c.comparison)},
      {"verdict", verdict_name(c.comparison.verdict)}};
}

inline Json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open '" + file + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + file.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write '" + file.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + file.string() + "'");
}

inline void write_json_file(const std::filesystem::path& file, const Json& j) { write_text_file(file, j.dump(2) + "\n"); }

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Comma-separated table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw InvalidArgument("CsvTable: row width differs from header");
    rows_.push_back(std::move(row));
  }

  std::string str() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return os.str();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Scan table: one row per direction; the .dat twin holds (index, value) for gnuplot.
inline void write_scan_tables(const std::filesystem::path& stem, const ScanReport& r) {
  CsvTable t({"index", "direction", "block_norms", "value", "std_error", "numerical_error", "negative"});
  std::ostringstream dat;
  dat << "# index value\n";
  for (std::size_t j = 0; j < r.values.size(); ++j) {
    const auto& v = r.values[j];
    std::string dir, norms;
    for (std::size_t i = 0; i < v.xi.vec().size(); ++i) dir += (i ? " " : "") + format_double(v.xi[i]);
    const auto b = v.xi.block_norms();
    for (std::size_t i = 0; i < b.size(); ++i) norms += (i ? " " : "") + format_double(b[i]);
    const bool neg = std::find(r.negative_witnesses.begin(), r.negative_witnesses.end(), j) != r.negative_witnesses.end();
    t.add({std::to_string(j), dir, norms, format_double(v.value.value), format_double(v.value.std_error),
           format_double(v.value.numerical_error), neg ? "1" : "0"});
    dat << j << " " << format_double(v.value.value) << "\n";
  }
  write_text_file(stem.string() + ".csv", t.str());
  write_text_file(stem.string() + ".dat", dat.str());
}

}  // namespace bplab
