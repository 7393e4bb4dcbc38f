#pragma once

// Scenario configs, the end-to-end scenario drivers and CSV reporting.
// Needs nlohmann/json (json.hpp) on the include path.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "commbench/commutators.hpp"
#include "commbench/embeddings.hpp"
#include "commbench/error.hpp"
#include "commbench/geometry.hpp"
#include "commbench/necessity.hpp"
#include "commbench/operators.hpp"
#include "commbench/spaces.hpp"
#include "commbench/weights.hpp"

namespace commbench {

inline const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids{"cor4_2",  "cor4_7",  "cor4_8",  "cor4_12",     "cor4_15",
                                            "cor4_17", "cor4_19", "cor4_21", "kernel_admit", "embeddings"};
  return ids;
}

struct KernelConfig {
  std::string omega = "sgn";  // sgn | cos | cos2 | one | zero | jump | table
  std::vector<double> table;
  int table_size = 64;
  std::string interpolation = "linear";  // linear | nearest
  double alpha = 0.0;
};

struct SymbolConfig {
  std::string kind = "log_abs";  // log_abs | power | step | random | constant
  double beta = 0.5;
  std::uint64_t seed = 1;
  int pieces = 8;
  double value = 1.0;
};

struct SpaceConfig {
  double p = 2.0;
  double q = 2.0;
  double lambda = -0.25;
  double beta = 0.5;
};

struct WeightSelector {
  std::string kind = "unit";  // unit | power
  double a = 0.0;
};

struct WeightsConfig {
  WeightSelector omega;
  WeightSelector lambda;
};

struct FamilyRoot {
  Point center{0.0, 0.0};
  double side = 2.0;
};

struct ScenarioConfig {
  std::string scenario = "cor4_2";
  int dim = 1;
  int resolution = 4096;
  int depth = 7;
  KernelConfig kernel;
  SymbolConfig symbol;
  SpaceConfig space;
  WeightsConfig weights;
  double eps_xi = 0.5;
  double h_max = 256.0;
  std::uint64_t seed = 1;
  std::string output;
  double domain_half_side = 1.0;
  std::optional<FamilyRoot> family_root;
  int output_resolution = 1024;
  int n0 = 24;
};

// JSON mapping uses the field names verbatim.
inline void from_json(const nlohmann::json& j, KernelConfig& k) {
  k.omega = j.value("omega", k.omega);
  k.table = j.value("table", k.table);
  k.table_size = j.value("table_size", k.table_size);
  k.interpolation = j.value("interpolation", k.interpolation);
  k.alpha = j.value("alpha", k.alpha);
}
inline void to_json(nlohmann::json& j, const KernelConfig& k) {
  j = {{"omega", k.omega}, {"table", k.table}, {"table_size", k.table_size},
       {"interpolation", k.interpolation}, {"alpha", k.alpha}};
}
inline void from_json(const nlohmann::json& j, SymbolConfig& s) {
  s.kind = j.value("kind", s.kind);
  s.beta = j.value("beta", s.beta);
  s.seed = j.value("seed", s.seed);
  s.pieces = j.value("pieces", s.pieces);
  s.value = j.value("value", s.value);
}
inline void to_json(nlohmann::json& j, const SymbolConfig& s) {
  j = {{"kind", s.kind}, {"beta", s.beta}, {"seed", s.seed}, {"pieces", s.pieces}, {"value", s.value}};
}
inline void from_json(const nlohmann::json& j, SpaceConfig& s) {
  s.p = j.value("p", s.p);
  if (j.contains("q")) s.q = j.at("q").is_null() ? std::numeric_limits<double>::infinity() : j.at("q").get<double>();
  s.lambda = j.value("lambda", s.lambda);
  s.beta = j.value("beta", s.beta);
}
inline void to_json(nlohmann::json& j, const SpaceConfig& s) {
  j = {{"p", s.p}, {"q", s.q}, {"lambda", s.lambda}, {"beta", s.beta}};
}
inline void from_json(const nlohmann::json& j, WeightSelector& w) {
  w.kind = j.value("kind", w.kind);
  w.a = j.value("a", w.a);
}
inline void to_json(nlohmann::json& j, const WeightSelector& w) { j = {{"kind", w.kind}, {"a", w.a}}; }
inline void from_json(const nlohmann::json& j, WeightsConfig& w) {
  if (j.contains("omega")) j.at("omega").get_to(w.omega);
  if (j.contains("lambda")) j.at("lambda").get_to(w.lambda);
}
inline void to_json(nlohmann::json& j, const WeightsConfig& w) { j = {{"omega", w.omega}, {"lambda", w.lambda}}; }

/// Built-in defaults per scenario; a JSON config overrides them field by field.
inline ScenarioConfig default_config(const std::string& id) {
  ScenarioConfig c;
  c.scenario = id;
  if (id == "cor4_2") {
    c.depth = 7;
  } else if (id == "cor4_7") {
    c.resolution = 2048;
    c.weights.omega = {"power", -0.5};
  } else if (id == "cor4_8") {
    c.weights.omega = {"power", -0.5};
    c.weights.lambda = {"unit", 0.0};
  } else if (id == "cor4_12") {
    c.resolution = 1024;
    c.depth = 5;
    c.kernel.alpha = 0.5;
    c.weights.omega = {"power", -0.5};
    c.weights.lambda = {"unit", 0.0};
  } else if (id == "cor4_15") {
    c.dim = 2;
    c.resolution = 512;
    c.depth = 2;
    c.kernel.omega = "cos2";
    c.kernel.alpha = -1.0;
    c.symbol = {"power", 1.0, 1, 8, 1.0};
    c.space.beta = 1.0;
    c.family_root = FamilyRoot{{0.0, -0.9375}, 0.125};
    c.output_resolution = 64;
    c.n0 = 16;
  } else if (id == "cor4_17") {
    c.space = {1.5, 6.0, -0.25, 0.5};
    c.symbol = {"power", 0.5, 1, 8, 1.0};
    c.weights.omega = {"power", -0.25};
  } else if (id == "cor4_19") {
    c.space = {2.0, 4.0, -0.4, 0.25};
    c.symbol = {"power", 0.25, 1, 8, 1.0};
  } else if (id == "cor4_21") {
    c.space = {2.0, 2.0, -0.25, 0.5};
    c.kernel.alpha = -0.5;
    c.symbol = {"power", 0.5, 1, 8, 1.0};
  } else if (id == "kernel_admit") {
    c.h_max = 64.0;
  } else if (id == "embeddings") {
    c.resolution = 1024;
    c.depth = 6;
    c.space = {2.0, 4.0, -0.5, 0.5};
  } else {
    throw DomainError("unknown scenario id: " + id);
  }
  return c;
}

inline ScenarioConfig config_from_json(const nlohmann::json& j, std::optional<std::string> id = std::nullopt) {
  const std::string sid = id ? *id : j.value("scenario", std::string("cor4_2"));
  if (id && j.contains("scenario") && j.at("scenario").get<std::string>() != *id)
    throw DomainError("config scenario '" + j.at("scenario").get<std::string>() + "' differs from --id " + *id);
  ScenarioConfig c = default_config(sid);
  try {
    c.dim = j.value("dim", c.dim);
    c.resolution = j.value("resolution", c.resolution);
    c.depth = j.value("depth", c.depth);
    if (j.contains("kernel")) j.at("kernel").get_to(c.kernel);
    if (j.contains("symbol")) j.at("symbol").get_to(c.symbol);
    if (j.contains("space")) {
      // q = null stands for infinity.
      j.at("space").get_to(c.space);
    }
    if (j.contains("weights")) j.at("weights").get_to(c.weights);
    c.eps_xi = j.value("eps_xi", c.eps_xi);
    c.h_max = j.value("h_max", c.h_max);
    c.seed = j.value("seed", c.seed);
    c.output = j.value("output", c.output);
    c.domain_half_side = j.value("domain_half_side", c.domain_half_side);
    if (j.contains("family_root")) {
      const auto& r = j.at("family_root");
      if (r.is_null()) {
        c.family_root.reset();
      } else {
        FamilyRoot fr;
        const auto ctr = r.at("center").get<std::vector<double>>();
        detail::require(!ctr.empty() && ctr.size() <= 2, "family_root.center must have 1 or 2 entries");
        fr.center = {ctr[0], ctr.size() > 1 ? ctr[1] : 0.0};
        fr.side = r.at("side").get<double>();
        c.family_root = fr;
      }
    }
    c.output_resolution = j.value("output_resolution", c.output_resolution);
    c.n0 = j.value("n0", c.n0);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  return c;
}

inline nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json j{{"scenario", c.scenario}, {"dim", c.dim}, {"resolution", c.resolution}, {"depth", c.depth},
                   {"kernel", c.kernel},     {"symbol", c.symbol}, {"weights", c.weights}, {"eps_xi", c.eps_xi},
                   {"h_max", c.h_max},       {"seed", c.seed},     {"output", c.output},
                   {"domain_half_side", c.domain_half_side},       {"output_resolution", c.output_resolution},
                   {"n0", c.n0}};
  j["space"] = c.space;
  if (std::isinf(c.space.q)) j["space"]["q"] = nullptr;
  if (c.family_root)
    j["family_root"] = {{"center", {c.family_root->center[0], c.family_root->center[1]}},
                        {"side", c.family_root->side}};
  return j;
}

// ---------------------------------------------------------------- reporting

struct ReportRow {
  std::string scenario;
  std::string item;
  std::string quantity;
  double value = 0.0;
  int resolution = 0;
  std::uint64_t seed = 0;
  std::string notes;

  friend bool operator==(const ReportRow& a, const ReportRow& b) {
    const bool same_value = std::isnan(a.value) ? std::isnan(b.value) : a.value == b.value;
    return a.scenario == b.scenario && a.item == b.item && a.quantity == b.quantity && same_value &&
           a.resolution == b.resolution && a.seed == b.seed && a.notes == b.notes;
  }
};

inline constexpr const char* kCsvHeader = "scenario,item,quantity,value,resolution,seed,notes";

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw DomainError("unterminated quoted CSV field");
  out.push_back(cur);
  return out;
}

template <class T>
T parse_number(const std::string& s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DomainError("bad number in CSV: " + s);
  return v;
}

}  // namespace detail

inline std::string format_report(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += detail::csv_quote(r.scenario) + "," + detail::csv_quote(r.item) + "," + detail::csv_quote(r.quantity) +
           "," + detail::format_double(r.value) + "," + std::to_string(r.resolution) + "," + std::to_string(r.seed) +
           "," + detail::csv_quote(r.notes) + "\n";
  }
  return out;
}

inline void emit_report(const std::vector<ReportRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open report for writing: " + path);
  os << format_report(rows);
  if (!os) throw Error("failed writing report: " + path);
}

inline std::vector<ReportRow> parse_report(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw DomainError("CSV header mismatch");
  std::vector<ReportRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    // A quoted field may span lines; quotes balance at the end of a record.
    while (std::count(line.begin(), line.end(), '"') % 2 != 0) {
      std::string more;
      if (!std::getline(is, more)) throw DomainError("unterminated quoted CSV field");
      line += "\n" + more;
    }
    const auto f = detail::csv_split(line);
    if (f.size() != 7) throw DomainError("CSV row must have 7 fields: " + line);
    rows.push_back({f[0], f[1], f[2], detail::parse_number<double>(f[3]), detail::parse_number<int>(f[4]),
                    detail::parse_number<std::uint64_t>(f[5]), f[6]});
  }
  return rows;
}

inline std::vector<ReportRow> read_report(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open report: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_report(ss.str());
}

// ------------------------------------------------------------ construction

/// Uniform double in [0, 1) from the top 53 bits, independent of the
/// standard library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline Cube domain_of(const ScenarioConfig& c) { return Cube::make(c.dim, {0.0, 0.0}, 2.0 * c.domain_half_side); }

inline GridFunction make_symbol(const ScenarioConfig& c) {
  const Cube dom = domain_of(c);
  const auto& s = c.symbol;
  const int n = c.dim;
  if (s.kind == "log_abs")
    return GridFunction::sample(dom, c.resolution, [n](const Point& x) {
      const double r = norm2(x, n);
      return r > 0.0 ? std::log(r) : 0.0;
    });
  if (s.kind == "power") {
    detail::require(s.beta > 0.0, "power symbol needs beta > 0");
    return GridFunction::sample(dom, c.resolution, [n, &s](const Point& x) { return std::pow(norm2(x, n), s.beta); });
  }
  if (s.kind == "step")
    return GridFunction::sample(dom, c.resolution, [](const Point& x) { return x[0] > 0.0 ? 0.5 : -0.5; });
  if (s.kind == "constant") return GridFunction::constant(dom, c.resolution, s.value);
  if (s.kind == "random") {
    detail::require(s.pieces >= 1, "random symbol needs pieces >= 1");
    std::mt19937_64 rng(s.seed);
    const int blocks = n == 1 ? s.pieces : s.pieces * s.pieces;
    std::vector<double> vals(static_cast<std::size_t>(blocks));
    for (double& v : vals) v = 2.0 * unit_uniform(rng) - 1.0;
    return GridFunction::sample(dom, c.resolution, [&](const Point& x) {
      auto idx = [&](int a) {
        const double t = (x[a] - dom.lower(a)) / dom.side;
        return std::clamp(static_cast<int>(t * s.pieces), 0, s.pieces - 1);
      };
      return vals[static_cast<std::size_t>(idx(0) + (n == 2 ? s.pieces * idx(1) : 0))];
    });
  }
  throw DomainError("unknown symbol kind: " + s.kind);
}

inline SphereSymbol make_sphere_symbol(const ScenarioConfig& c) {
  const auto& k = c.kernel;
  const auto rule = k.interpolation == "nearest" ? Interpolation::Nearest : Interpolation::Linear;
  detail::require(k.interpolation == "nearest" || k.interpolation == "linear", "interpolation must be linear or nearest");
  const int m = k.table_size;
  const double pi = std::numbers::pi;
  if (c.dim == 1) {
    if (k.omega == "sgn" || k.omega == "cos") return SphereSymbol::pair(1.0, -1.0);
    if (k.omega == "one") return SphereSymbol::pair(1.0, 1.0);
    if (k.omega == "zero") return SphereSymbol::pair(0.0, 0.0);
    if (k.omega == "table") {
      detail::require(k.table.size() == 2, "dim 1 table must hold (plus, minus)");
      return SphereSymbol::pair(k.table[0], k.table[1]);
    }
    throw DomainError("symbol '" + k.omega + "' is not available in dim 1");
  }
  if (k.omega == "sgn")
    return SphereSymbol::from_angle(m, [](double t) { return std::cos(t) > 1e-12 ? 1.0 : (std::cos(t) < -1e-12 ? -1.0 : 0.0); },
                                    Interpolation::Nearest);
  if (k.omega == "cos") return SphereSymbol::from_angle(m, [](double t) { return std::cos(t); }, rule);
  if (k.omega == "cos2") return SphereSymbol::from_angle(m, [](double t) { return std::cos(2.0 * t); }, rule);
  if (k.omega == "one") return SphereSymbol::constant(2, 1.0, m);
  if (k.omega == "zero") return SphereSymbol::constant(2, 0.0, m);
  if (k.omega == "jump")
    return SphereSymbol::from_angle(m, [pi](double t) { return (pi - t) / pi; }, Interpolation::Nearest);
  if (k.omega == "table") return SphereSymbol::table(k.table, rule);
  throw DomainError("unknown kernel symbol: " + k.omega);
}

inline KernelSpec make_kernel(const ScenarioConfig& c) { return KernelSpec::make(make_sphere_symbol(c), c.kernel.alpha); }

inline Weight make_weight(const WeightSelector& w, int dim) {
  if (w.kind == "unit") return Weight::unit(dim);
  if (w.kind == "power") return Weight::power(dim, w.a);
  throw DomainError("unknown weight kind: " + w.kind);
}

inline std::vector<Cube> make_family(const ScenarioConfig& c) {
  const Cube root = c.family_root ? Cube::make(c.dim, c.family_root->center, c.family_root->side) : domain_of(c);
  detail::require(domain_of(c).contains(root), "family root must lie inside the domain");
  return dyadic_family(root, c.depth);
}

/// Cubes of the family on which b's grid puts at least two cells per axis.
inline std::vector<Cube> resolved_cubes(const GridFunction& b, const std::vector<Cube>& family) {
  std::vector<Cube> out;
  for (const Cube& q : family) {
    const CellRange r = b.cells_in(q);
    if (r.count(0) >= 2 && (b.dim() == 1 || r.count(1) >= 2)) out.push_back(q);
  }
  return out;
}

// ------------------------------------------------------------------ stages

class RowSink {
 public:
  explicit RowSink(const ScenarioConfig& c) : c_(c) {}
  void add(const std::string& item, const std::string& quantity, double value, const std::string& notes = "") {
    rows_.push_back({c_.scenario, item, quantity, value, c_.resolution, c_.seed, notes});
  }
  void error(const std::string& stage, const std::exception& e) {
    const bool numerical = dynamic_cast<const NumericalError*>(&e) != nullptr;
    add(stage, "error", numerical ? 2.0 : 1.0, e.what());
    numerical ? ++numerical_errors_ : ++domain_errors_;
  }
  std::vector<ReportRow>& rows() { return rows_; }
  int numerical_errors() const { return numerical_errors_; }
  int domain_errors() const { return domain_errors_; }

 private:
  const ScenarioConfig& c_;
  std::vector<ReportRow> rows_;
  int numerical_errors_ = 0;
  int domain_errors_ = 0;
};

inline ShiftCertificate stage_certificate(RowSink& out, const ScenarioConfig& c, const KernelSpec& k) {
  const ShiftCertificate s = find_shift(k, c.eps_xi, c.h_max, c.n0);
  const std::string note = s.rigorous ? "mode=" + s.mode : "mode=" + s.mode + "; not rigorous pointwise";
  out.add("shift", "h_norm", s.h_norm, note);
  out.add("shift", "oscillation", s.oscillation);
  out.add("shift", "proxy", s.proxy);
  out.add("shift", "xi_bound", s.xi_bound);
  out.add("shift", "xi_limit", s.xi_limit());
  out.add("shift", "A1", s.A1);
  out.add("shift", "A4", s.A4);
  out.add("shift", "C_tilde", s.C_tilde);
  out.add("shift", "lambda_containment", s.lambda_containment);
  out.add("shift", "rigorous", s.rigorous ? 1.0 : 0.0);
  return s;
}

/// Indicator and Haar probes on the family cubes (at most `max_probes`).
inline std::vector<GridFunction> make_probes(const GridFunction& b, const std::vector<Cube>& family,
                                             std::size_t max_probes, std::size_t max_cells) {
  std::vector<GridFunction> probes;
  for (const Cube& q : resolved_cubes(b, family)) {
    if (probes.size() + 2 > max_probes) break;
    const GridFunction local = restrict_to(b, q);
    if (local.size() > max_cells) continue;
    const Cube& d = local.domain();
    probes.push_back(GridFunction::constant(d, local.resolution(), 1.0));
    probes.push_back(GridFunction::sample(d, local.resolution(),
                                          [&](const Point& x) { return x[0] < d.center[0] ? 1.0 : -1.0; }));
  }
  return probes;
}

struct LowerBoundStage {
  LowerBoundReport report;
  double probe = 0.0;
  double direct = 0.0;
};

inline LowerBoundStage stage_lower_bound(RowSink& out, const std::string& prefix, const ScenarioConfig& c,
                                         const GridFunction& b, const KernelSpec& k, const SpaceSpec& X,
                                         const SpaceSpec& Y, const MuFunctional& mu, const std::vector<Cube>& family,
                                         const ShiftCertificate& cert) {
  LowerBoundStage st;
  const CommutatorTask task{b, k, 1, CommutatorForm::CombinedKernel, std::nullopt};
  const std::size_t max_cells = c.dim == 1 ? 2048 : 1024;
  const auto probes = make_probes(b, family, 48, max_cells);
  const GridFunction out_grid = GridFunction::constant(b.domain(), c.output_resolution, 0.0);
  const auto norm_family = dyadic_family(b.domain(), std::min(c.depth, 5));
  const ProbeResult pr = operator_norm_probe(task, X, Y, probes, out_grid, &norm_family);
  st.probe = pr.value;
  st.report = bmo_lower_bound(b, task, X, Y, mu, family, cert, pr.value);
  const auto resolved = resolved_cubes(b, family);
  st.direct = resolved.empty() ? 0.0 : bmo_mu_norm(b, mu, resolved);
  std::size_t certified = 0, violations = 0;
  double window = 0.0;
  for (const auto& r : st.report.records) {
    certified += r.certified ? 1 : 0;
    violations += r.violations;
    window = std::max(window, r.window_ratio);
  }
  const std::string sp = "X=" + X.describe() + "; Y=" + Y.describe();
  out.add(prefix, "aggregate", st.report.aggregate, sp);
  out.add(prefix, "constant_chain", st.report.constant_chain);
  out.add(prefix, "window_probe", window);
  out.add(prefix, "probe_norm", st.probe, "probes=" + std::to_string(pr.used) + "; output N=" + std::to_string(c.output_resolution));
  out.add(prefix, "bmo_direct", st.direct);
  const double proxy = st.report.operator_norm_proxy;
  out.add(prefix, "aggregate_over_probe", proxy > 0.0 ? st.report.aggregate / proxy : 0.0,
          proxy > 0.0 ? "" : "degenerate: zero probe norm");
  out.add(prefix, "consistent", st.report.consistent ? 1.0 : 0.0, "aggregate <= constant_chain * probe");
  out.add(prefix, "cubes_certified", static_cast<double>(certified));
  out.add(prefix, "cubes_skipped", static_cast<double>(st.report.skipped), "shifted window outside the grid");
  out.add(prefix, "violations", static_cast<double>(violations));
  return st;
}

inline double median_abs(const std::vector<double>& v) {
  std::vector<double> a;
  for (double x : v)
    if (x != 0.0) a.push_back(std::abs(x));
  if (a.empty()) return 0.0;
  std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2), a.end());
  return a[a.size() / 2];
}

/// Geometric λ grid 2^k · median, k = -6..6.
inline std::vector<double> lambda_grid(double median) {
  std::vector<double> out;
  for (int k = -6; k <= 6; ++k) out.push_back(std::ldexp(median, k));
  return out;
}

// ------------------------------------------------------ single-stage runs

/// Norms of the symbol b in every space family the config names.
inline std::vector<ReportRow> run_norms(const ScenarioConfig& c) {
  RowSink out(c);
  const GridFunction b = make_symbol(c);
  const auto family = make_family(c);
  const double p = c.space.p, q = c.space.q, lam = c.space.lambda;
  out.add("b", "L^p", norm(b, SpaceSpec::lebesgue(p)), SpaceSpec::lebesgue(p).describe());
  out.add("b", "L^p_weak", norm(b, SpaceSpec::weak(p)), SpaceSpec::weak(p).describe());
  out.add("b", "L^pq", norm(b, SpaceSpec::lorentz(p, q)), SpaceSpec::lorentz(p, q).describe());
  out.add("b", "M^p_lambda", norm(b, SpaceSpec::morrey(p, lam), family), SpaceSpec::morrey(p, lam).describe());
  const Weight w = make_weight(c.weights.omega, c.dim);
  out.add("b", "L^p_omega", norm(b, SpaceSpec::weighted(p, w)), SpaceSpec::weighted(p, w).describe());
  const auto resolved = resolved_cubes(b, family);
  if (!resolved.empty()) {
    out.add("b", "bmo", bmo_mu_norm(b, MuFunctional::lebesgue(), resolved), "cubes=" + std::to_string(resolved.size()));
    out.add("b", "bmo_lip_beta", bmo_mu_norm(b, MuFunctional::lip(c.space.beta), resolved));
  }
  out.add("b", "lip_beta", lipschitz_seminorm(b, c.space.beta), "beta=" + detail::format_double(c.space.beta));
  return std::move(out.rows());
}

/// Shift search and the pointwise certificate on each resolved family cube.
inline std::vector<ReportRow> run_certify(const ScenarioConfig& c) {
  RowSink out(c);
  const GridFunction b = make_symbol(c);
  const KernelSpec k = make_kernel(c);
  const ShiftCertificate cert = stage_certificate(out, c, k);
  std::size_t used = 0, skipped = 0, violations = 0;
  int idx = 0;
  for (const Cube& q : resolved_cubes(b, make_family(c))) {
    const std::string item = "cube_" + std::to_string(idx++);
    try {
      const PointwiseResult r = pointwise_certificate(b, q, k, cert);
      ++used;
      violations += r.violations.size();
      out.add(item, "lhs", r.lhs);
      out.add(item, "min_rhs", r.min_rhs);
      out.add(item, "violations", static_cast<double>(r.violations.size()));
    } catch (const DomainError&) {
      ++skipped;
    }
  }
  out.add("certificate", "cubes_certified", static_cast<double>(used));
  out.add("certificate", "cubes_skipped", static_cast<double>(skipped));
  out.add("certificate", "violations", static_cast<double>(violations));
  return std::move(out.rows());
}

/// Cone of Ω and the kernel oscillation along it for |h| = 2, 4, ... <= h_max.
inline void stage_oscillation(RowSink& out, const ScenarioConfig& c, const SphereSymbol& s) {
  const double n = c.dim;
  const auto cone = lower_upper_cone(s);
  out.add("cone", "found", cone ? 1.0 : 0.0);
  if (!cone) return;
  out.add("cone", "c", cone->c);
  out.add("cone", "C", cone->C);
  out.add("cone", "half_width", cone->half_width);
  for (double hn = 2.0; hn <= c.h_max; hn *= 2.0) {
    if (hn <= std::sqrt(n)) continue;
    const std::string item = "h_" + detail::format_double(hn);
    out.add(item, "oscillation_Linf", kernel_oscillation(s, hn * cone->direction, ZMode::Linf, c.n0));
    out.add(item, "oscillation_L1", kernel_oscillation(s, hn * cone->direction, ZMode::L1, c.n0));
  }
}

inline std::vector<ReportRow> run_oscillation(const ScenarioConfig& c) {
  RowSink out(c);
  stage_oscillation(out, c, make_sphere_symbol(c));
  return std::move(out.rows());
}

/// Lower estimate of ‖[b, T]‖_{L^p -> L^q} from indicator and Haar probes.
inline std::vector<ReportRow> run_probe(const ScenarioConfig& c) {
  RowSink out(c);
  const GridFunction b = make_symbol(c);
  const KernelSpec k = make_kernel(c);
  const CommutatorTask task{b, k, 1, CommutatorForm::CombinedKernel, std::nullopt};
  const auto probes = make_probes(b, make_family(c), 48, c.dim == 1 ? 2048 : 1024);
  const GridFunction out_grid = GridFunction::constant(b.domain(), c.output_resolution, 0.0);
  const SpaceSpec X = SpaceSpec::lebesgue(c.space.p), Y = SpaceSpec::lebesgue(c.space.q);
  const ProbeResult r = operator_norm_probe(task, X, Y, probes, out_grid);
  out.add("probe", "norm", r.value, "X=" + X.describe() + "; Y=" + Y.describe());
  out.add("probe", "used", static_cast<double>(r.used));
  out.add("probe", "skipped", static_cast<double>(r.skipped));
  return std::move(out.rows());
}

// --------------------------------------------------------------- relations

namespace detail {

inline void relation(bool ok, const std::string& what) {
  if (!ok) throw DomainError("parameter relation violated: " + what);
}

inline bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a) + std::abs(b)); }

}  // namespace detail

/// Checks the parameter relation each scenario's statement imposes.
inline void check_relations(const ScenarioConfig& c) {
  using detail::relation;
  relation(c.dim == 1 || c.dim == 2, "dim in {1, 2}");
  relation(c.resolution >= 2 && c.depth >= 0, "resolution >= 2, depth >= 0");
  relation(c.eps_xi > 0.0 && c.h_max >= 2.0, "eps_xi > 0, h_max >= 2");
  const double n = c.dim, a = c.kernel.alpha, p = c.space.p, q = c.space.q, b = c.space.beta, l = c.space.lambda;
  const auto& id = c.scenario;
  if (id == "cor4_2") {
    relation(a >= 0.0 && a < n, "0 <= alpha < n");
    relation(p > 1.0 && (a == 0.0 || p < n / a), "1 < p < n/alpha");
  } else if (id == "cor4_7") {
    relation(a == 0.0, "alpha = 0");
    relation(p > 1.0 && std::isfinite(p), "1 < p < inf");
    relation(c.weights.omega.kind == "unit" || (c.weights.omega.a <= 0.0 && c.weights.omega.a > -n),
             "omega in A_1 (power weights |x|^a with -n < a <= 0)");
  } else if (id == "cor4_8") {
    relation(a == 0.0, "alpha = 0");
    relation(p > 1.0 && std::isfinite(p), "1 < p < inf");
    for (const auto* w : {&c.weights.omega, &c.weights.lambda})
      relation(w->kind == "unit" || (w->a > -n && w->a < n * (p - 1.0)), "omega, lambda in A_p (-n < a < n(p-1))");
  } else if (id == "cor4_12") {
    relation(a > 0.0 && a < 2.0 * n, "0 < alpha < 2n (bilinear fractional stand-in)");
    for (const auto* w : {&c.weights.omega, &c.weights.lambda})
      relation(w->kind == "unit" || (w->a <= 0.0 && w->a > -n), "omega_j in A_1");
  } else if (id == "cor4_15") {
    relation(a == -1.0, "alpha = -1");
    relation(p > 1.0 && std::isfinite(p), "1 < p < inf");
  } else if (id == "cor4_17") {
    relation(b > 0.0 && b < 1.0, "0 < beta < 1");
    relation(a >= 0.0 && a < n && a + b > 0.0 && a + b < n, "0 <= alpha < n, 0 < alpha + beta < n");
    relation(p > 1.0 && q > 1.0 && std::isfinite(q), "1 < p, q < inf");
    relation(detail::close(1.0 / q, 1.0 / p - (a + b) / n), "1/q = 1/p - (alpha + beta)/n");
    relation(c.weights.omega.kind == "unit" || (c.weights.omega.a <= 0.0 && c.weights.omega.a > -n), "omega in A_1");
  } else if (id == "cor4_19") {
    relation(b > 0.0 && b < 1.0, "0 < beta < 1");
    relation(a >= 0.0 && a < n && a + b < n, "0 <= alpha < n, alpha + beta < n");
    relation(p > 1.0 && q > 1.0 && std::isfinite(q), "1 < p, q < inf");
    relation(detail::close(1.0 / q, 1.0 / p - (a + b) / n), "1/q = 1/p - (alpha + beta)/n");
    relation(a + b + l < 0.0, "alpha + beta + lambda < 0");
    relation(l >= -n / p && l < 0.0, "-n/p <= lambda < 0");
    relation(a + b + l >= -n / q, "nu = alpha + beta + lambda >= -n/q (target Morrey space)");
  } else if (id == "cor4_21") {
    relation(b > 0.0 && b <= 1.0, "0 < beta <= 1");
    relation(detail::close(a, -b), "alpha = -beta");
    relation(p > 1.0 && std::isfinite(p), "1 < p < inf");
    relation(l >= -n / p && l < 0.0, "-n/p <= lambda < 0");
  } else if (id == "embeddings") {
    relation(p > 0.0 && q > 0.0, "p, q in (0, inf]");
    relation(std::isfinite(p) && l >= -n / p && l < 0.0, "-n/p <= lambda < 0");
  }
}

// --------------------------------------------------------------- scenarios

namespace detail {

inline void scenario_norm_equivalence(RowSink& out, const ScenarioConfig& c) {
  const GridFunction b = make_symbol(c);
  const KernelSpec k = make_kernel(c);
  const auto family = make_family(c);
  const ShiftCertificate cert = stage_certificate(out, c, k);
  const double n = c.dim, p = c.space.p;
  const auto& id = c.scenario;
  if (id == "cor4_2") {
    const double q = 1.0 / (1.0 / p - k.alpha / n);
    stage_lower_bound(out, "strong", c, b, k, SpaceSpec::lebesgue(p), SpaceSpec::lebesgue(q), MuFunctional::lebesgue(),
                      family, cert);
    stage_lower_bound(out, "weak", c, b, k, SpaceSpec::lebesgue(p), SpaceSpec::weak(q), MuFunctional::lebesgue(),
                      family, cert);
  } else if (id == "cor4_8") {
    const Weight w = make_weight(c.weights.omega, c.dim), l = make_weight(c.weights.lambda, c.dim);
    const Weight mu_w = product_weight({w, l}, {1.0 / p, -1.0 / p});
    out.add("weights", "omega_Ap", ap_constant(w, p, family));
    out.add("weights", "lambda_Ap", ap_constant(l, p, family));
    double lo = kInf, hi = 0.0;
    for (const Cube& q : family) {
      const double r = bloom_inequality_check(w, l, p, q).ratio();
      lo = std::min(lo, r), hi = std::max(hi, r);
    }
    out.add("bloom", "min_ratio", lo, "lhs/rhs over the family");
    out.add("bloom", "max_ratio", hi, "lhs/rhs over the family");
    stage_lower_bound(out, "strong", c, b, k, SpaceSpec::weighted(p, w), SpaceSpec::weighted(p, l),
                      MuFunctional::weighted_measure(mu_w), family, cert);
  } else if (id == "cor4_15") {
    const auto resolved = resolved_cubes(b, family);
    out.add("symbol", "lipschitz_seminorm", lipschitz_seminorm(b, 1.0));
    stage_lower_bound(out, "strong", c, b, k, SpaceSpec::lebesgue(p), SpaceSpec::lebesgue(p), MuFunctional::lip(1.0),
                      family, cert);
    stage_lower_bound(out, "weak", c, b, k, SpaceSpec::lebesgue(p), SpaceSpec::weak(p), MuFunctional::lip(1.0), family,
                      cert);
  } else if (id == "cor4_17") {
    const double beta = c.space.beta, q = c.space.q;
    const Weight w = make_weight(c.weights.omega, c.dim);
    const Weight wy = w.pow(1.0 - (1.0 - k.alpha / n) * q);
    stage_lower_bound(out, "weighted", c, b, k, SpaceSpec::weighted(p, w), SpaceSpec::weighted(q, wy),
                      MuFunctional::weighted_lip(beta, w), family, cert);
    out.add("forward", "status", 0.0, "forward direction probed, not certified");
  } else if (id == "cor4_19") {
    const double beta = c.space.beta, q = c.space.q, lam = c.space.lambda, nu = k.alpha + beta + lam;
    out.add("params", "nu", nu);
    stage_lower_bound(out, "strong", c, b, k, SpaceSpec::lebesgue(p), SpaceSpec::lebesgue(q), MuFunctional::lip(beta),
                      family, cert);
    stage_lower_bound(out, "morrey", c, b, k, SpaceSpec::morrey(p, lam), SpaceSpec::morrey(q, nu),
                      MuFunctional::lip(beta), family, cert);
  } else if (id == "cor4_21") {
    const double beta = c.space.beta, lam = c.space.lambda;
    stage_lower_bound(out, "morrey", c, b, k, SpaceSpec::morrey(p, lam), SpaceSpec::morrey(p, lam),
                      MuFunctional::lip(beta), family, cert);
    if (beta < 1.0) out.add("forward", "status", 0.0, "only (2) => (1) is asserted for beta < 1");
  }
}

inline GridFunction indicator_probe(const GridFunction& b) {
  // χ of [0, half]^n on the grid of b, as a sub-grid function.
  const double half = b.domain().side / 4.0;
  const Cube q = Cube::make(b.dim(), {half / 2.0, b.dim() == 2 ? half / 2.0 : 0.0}, half);
  const GridFunction local = restrict_to(b, q);
  return GridFunction::constant(local.domain(), local.resolution(), 1.0);
}

inline void scenario_cor4_7(RowSink& out, const ScenarioConfig& c) {
  const GridFunction b = make_symbol(c);
  const KernelSpec k = make_kernel(c);
  stage_certificate(out, c, k);
  if (c.dim == 2)
    for (double r : {0.5, 0.125})
      out.add("symbol", "lebesgue_modulus", lebesgue_point_modulus(k.symbol, {1.0, 0.0}, r), "r=" + format_double(r));
  const Weight w = make_weight(c.weights.omega, c.dim);
  out.add("weights", "omega_Ap", ap_constant(w, c.space.p, make_family(c)));
  const GridFunction f = indicator_probe(b);
  const CommutatorTask task{b, k, 1, CommutatorForm::CombinedKernel, std::nullopt};
  const auto res = commutator_apply(task, f, all_cell_centers(b));
  const GridFunction g(b.domain(), b.resolution(), res.values);
  const double med = median_abs(res.values);
  out.add("output", "median_abs", med, "exclusion=" + format_double(res.exclusion));
  double C = 0.0;
  int k_idx = -6;
  for (double lam : lambda_grid(med)) {
    const std::string item = "lambda_" + std::to_string(k_idx++);
    const OrliczPair pr = orlicz_weak_ratio(g, f, lam, w);
    out.add(item, "lambda", lam);
    out.add(item, "lhs", pr.lhs);
    out.add(item, "rhs", pr.rhs);
    const double r = pr.rhs > 0.0 ? pr.lhs / pr.rhs : 0.0;
    out.add(item, "ratio", r);
    C = std::max(C, r);
  }
  out.add("orlicz", "C", C, "max lhs/rhs over the lambda grid");
}

inline void scenario_cor4_12(RowSink& out, const ScenarioConfig& c) {
  const GridFunction b = make_symbol(c);
  const auto spec = BilinearFractionalSpec::make(c.dim, c.kernel.alpha);
  const auto family = make_family(c);
  const std::string stand_in = "bilinear fractional kernel (0 < alpha < 2n) stands in for the m-linear CZ kernel";
  const ShiftCertificate cert = find_shift_bilinear(spec, c.eps_xi, c.h_max, std::min(c.n0, 16));
  out.add("shift", "h_norm", cert.h_norm, stand_in);
  out.add("shift", "proxy", cert.proxy);
  out.add("shift", "xi_bound", cert.xi_bound);
  out.add("shift", "xi_limit", cert.xi_limit());
  out.add("shift", "C_tilde", cert.C_tilde);
  for (int slot : {1, 2}) {
    std::size_t used = 0, skipped = 0, violations = 0;
    double worst = kInf;
    for (const Cube& q : resolved_cubes(b, family)) {
      if (restrict_to(b, q).size() > 256) {
        ++skipped;
        continue;
      }
      try {
        const auto r = bilinear_pointwise_certificate(b, q, spec, cert, slot);
        ++used;
        violations += r.violations.size();
        if (r.lhs > 0.0) worst = std::min(worst, r.min_rhs / r.lhs);
      } catch (const DomainError&) {
        ++skipped;
      }
    }
    const std::string item = "slot" + std::to_string(slot);
    out.add(item, "cubes_certified", static_cast<double>(used));
    out.add(item, "cubes_skipped", static_cast<double>(skipped));
    out.add(item, "violations", static_cast<double>(violations));
    out.add(item, "min_rhs_over_lhs", std::isfinite(worst) ? worst : 0.0);
  }
  // Weak-type statistic with ν = (ω1 ω2)^{1/2}.
  const Weight w1 = make_weight(c.weights.omega, c.dim), w2 = make_weight(c.weights.lambda, c.dim);
  const Weight nu = product_weight({w1, w2}, {0.5, 0.5});
  const GridFunction fine = indicator_probe(b);
  const GridFunction f = GridFunction::constant(fine.domain(), std::min(fine.resolution(), c.dim == 1 ? 128 : 16), 1.0);
  const CommutatorTask task{b, spec, 1, CommutatorForm::CombinedKernel, std::nullopt};
  const GridFunction out_grid = GridFunction::constant(b.domain(), c.dim == 1 ? std::min(c.output_resolution, 512) : 32, 0.0);
  const auto res = bilinear_commutator_apply(task, f, f, all_cell_centers(out_grid));
  const GridFunction g(out_grid.domain(), out_grid.resolution(), res.values);
  const double med = median_abs(res.values);
  out.add("output", "median_abs", med, stand_in);
  double C = 0.0;
  int k_idx = -6;
  for (double lam : lambda_grid(std::sqrt(med))) {
    const std::string item = "lambda_" + std::to_string(k_idx++);
    const double lhs = orlicz_weak_ratio(g, f, lam * lam, nu).lhs;
    const double rhs = std::sqrt(orlicz_weak_ratio(g, f, lam, w1).rhs * orlicz_weak_ratio(g, f, lam, w2).rhs);
    out.add(item, "lambda", lam);
    out.add(item, "lhs", lhs);
    out.add(item, "rhs", rhs);
    const double r = rhs > 0.0 ? lhs / rhs : 0.0;
    out.add(item, "ratio", r);
    C = std::max(C, r);
  }
  out.add("orlicz", "C", C, "max lhs/rhs over the lambda grid");
}

inline void scenario_kernel_admit(RowSink& out, const ScenarioConfig& c) {
  const KernelSpec k{make_sphere_symbol(c), c.kernel.alpha};
  out.add("symbol", "mean", check_mean_zero(k.symbol));
  const Point m = check_first_moments(k.symbol);
  out.add("symbol", "moment_x", m[0]);
  if (c.dim == 2) out.add("symbol", "moment_y", m[1]);
  stage_oscillation(out, c, k.symbol);
  if (c.dim == 2)
    for (double r : {1.0, 0.5, 0.25, 0.125})
      out.add("r_" + format_double(r), "lebesgue_modulus", lebesgue_point_modulus(k.symbol, {1.0, 0.0}, r));
  std::string verdict = "admissible";
  double ok = 1.0;
  try {
    k.validate();
    stage_certificate(out, c, k);
  } catch (const Error& e) {
    verdict = e.what();
    ok = 0.0;
  }
  out.add("verdict", "admissible", ok, verdict);
}

inline void scenario_embeddings(RowSink& out, const ScenarioConfig& c) {
  const Cube dom = domain_of(c);
  const int N = c.resolution;
  std::mt19937_64 rng(c.seed);
  auto random_step = [&]() {
    const int pieces = 1 + static_cast<int>(unit_uniform(rng) * 16.0);
    std::vector<double> vals(static_cast<std::size_t>(c.dim == 1 ? pieces : pieces * pieces));
    for (double& v : vals) v = unit_uniform(rng) < 0.2 ? 0.0 : 2.0 * unit_uniform(rng) - 1.0;
    return GridFunction::sample(dom, N, [&](const Point& x) {
      auto idx = [&](int a) {
        return std::clamp(static_cast<int>((x[a] - dom.lower(a)) / dom.side * pieces), 0, pieces - 1);
      };
      return vals[static_cast<std::size_t>(idx(0) + (c.dim == 2 ? pieces * idx(1) : 0))];
    });
  };
  const double p = c.space.p, q = c.space.q, lam = c.space.lambda;
  const auto family = dyadic_family(dom, c.depth);
  constexpr int kPairs = 200;
  for (const std::string which : {"lorentz", "morrey"}) {
    int exceed = 0;
    double worst = 0.0, constant = 0.0;
    for (int i = 0; i < kPairs; ++i) {
      const GridFunction f = random_step(), g = random_step();
      const ProductCheck r = which == "lorentz" ? lorentz_product_check(f, g, p, q)
                                                : morrey_product_check(f, g, p, lam, family);
      constant = r.constant;
      if (r.rhs > 0.0) worst = std::max(worst, r.lhs / r.rhs);
      if (!r.holds()) ++exceed;
    }
    out.add(which, "constant", constant, "fixed before the run");
    out.add(which, "max_ratio", worst, std::to_string(kPairs) + " random step pairs");
    out.add(which, "exceedances", exceed);
  }
  const Cube unit = Cube::make(c.dim, {0.0, 0.0}, 1.0);
  const std::vector<std::pair<std::string, SpaceSpec>> specs{
      {"lebesgue", SpaceSpec::lebesgue(p)},
      {"weak", SpaceSpec::weak(p)},
      {"lorentz", SpaceSpec::lorentz(p, q)},
      {"morrey", SpaceSpec::morrey(p, lam)}};
  for (const auto& [name, s] : specs) {
    const IndicatorCheck r = indicator_norm_check(s, unit, c.dim == 1 ? N : std::min(N, 256));
    out.add("indicator_" + name, "computed", r.computed, s.describe());
    out.add("indicator_" + name, "closed_form", r.closed_form);
    out.add("indicator_" + name, "ratio", r.ratio(), "exact constant divided out");
  }
}

}  // namespace detail

struct ScenarioResult {
  std::vector<ReportRow> rows;
  int numerical_errors = 0;
  int domain_errors = 0;
};

/// Runs one scenario. Parameter relations are checked first and throw
/// DomainError; failures inside a stage become "error" rows.
inline ScenarioResult run_scenario(const ScenarioConfig& c) {
  check_relations(c);
  RowSink out(c);
  out.add("config", "dim", c.dim);
  out.add("config", "depth", c.depth);
  try {
    const auto& id = c.scenario;
    if (id == "cor4_2" || id == "cor4_8" || id == "cor4_15" || id == "cor4_17" || id == "cor4_19" || id == "cor4_21")
      detail::scenario_norm_equivalence(out, c);
    else if (id == "cor4_7")
      detail::scenario_cor4_7(out, c);
    else if (id == "cor4_12")
      detail::scenario_cor4_12(out, c);
    else if (id == "kernel_admit")
      detail::scenario_kernel_admit(out, c);
    else if (id == "embeddings")
      detail::scenario_embeddings(out, c);
    else
      throw DomainError("unknown scenario id: " + id);
  } catch (const Error& e) {
    out.error(c.scenario, e);
  }
  return {std::move(out.rows()), out.numerical_errors(), out.domain_errors()};
}

}  // namespace commbench
