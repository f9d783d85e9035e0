#include "detach/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "harness_internal.hpp"

namespace detach::harness {

namespace {

using detail::RunFn;

ParamSchema integer(std::string name, std::uint64_t def, double min, std::string help) {
  return {std::move(name), ParamKind::integer, Json(def), min, std::move(help)};
}
ParamSchema real(std::string name, double def, double min, std::string help) {
  return {std::move(name), ParamKind::real, Json(def), min, std::move(help)};
}
ParamSchema integers(std::string name, std::vector<std::uint64_t> def, double min,
                     std::string help) {
  return {std::move(name), ParamKind::integer_list, Json(def), min, std::move(help)};
}
ParamSchema reals(std::string name, std::vector<double> def, double min, std::string help) {
  return {std::move(name), ParamKind::real_list, Json(def), min, std::move(help)};
}
ParamSchema seed_param() { return integer("seed", 1, 0, "master seed"); }

struct Entry {
  ExperimentInfo info;
  RunFn run;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {{"ie_limit",
        "P(tau <= x n^2) against the inverse-exponential limit exp(-1/x), exact CDF",
        {integers("n_grid", {200, 500, 1000}, 2, "passenger counts"),
         real("x_min", 0.1, 1e-9, "smallest x"), real("x_max", 10.0, 1e-9, "largest x"),
         real("x_step", 0.05, 1e-9, "grid step for x"),
         real("tolerance", 0.02, 0, "bound on the sup error at tolerance_n"),
         integer("tolerance_n", 500, 2, "grid point where the tolerance applies"), seed_param()},
        {"n", "x", "k", "cdf", "limit", "abs_error"}},
       detail::run_ie_limit},
      {{"critical_window",
        "expected number of detachment states up to the critical time k(n,y) against exp(-y)/8",
        {reals("y_grid", {0.0, 1.0}, 0, "window offsets y"),
         integers("n_grid", {1000, 10000, 30000}, 3, "passenger counts, increasing"),
         real("relative_tolerance", 0.25, 0, "relative error allowed at the last n"),
         seed_param()},
        {"y", "n", "k_real", "k", "expected_states", "limit", "abs_error", "rel_error"}},
       detail::run_critical_window},
      {{"fidi_convergence",
        "P(L_{dn^2} = n | L_{cn^2} = n) against exp(-(d-c)/(2d^2)), error O(1/n)",
        {reals("c_list", {1.0, 1.0, 2.0}, 1e-9, "first times / n^2"),
         reals("d_list", {2.0, 4.0, 3.0}, 1e-9, "second times / n^2, paired with c_list"),
         integers("n_grid", {200, 500, 1000}, 1, "passenger counts"),
         real("error_constant", 5.0, 0, "allowed error is error_constant / n"), seed_param()},
        {"c", "d", "n", "k1", "k2", "cond_detached", "limit", "abs_error", "bound"}},
       detail::run_fidi_convergence},
      {{"concentration_phase",
        "variance-to-mean^2 ratio of the lonely count at k = n/(alpha log n); first-moment bound",
        {reals("alpha_grid", {0.5, 2.0}, 1e-9, "scale constants alpha"),
         integers("n_grid", {1000, 3000, 10000}, 3, "passenger counts, increasing"),
         integer("n_check", 10000, 3, "grid point for the ratio thresholds"),
         real("small_ratio", 0.02, 0, "ratio bound when alpha < 1"),
         real("large_ratio", 100.0, 0, "ratio floor when alpha > 1"),
         real("c_upper", 2.0, 1.0, "constant c of the first-moment bound, k = n/(c log n)"),
         real("exponent_slack", 0.2, 0, "mean must stay below n^{-(c-1)+slack}"), seed_param()},
        {"part", "alpha", "n", "k", "mean", "variance", "ratio", "pz_lower", "bound"}},
       detail::run_concentration_phase},
      {{"poisson_approx",
        "total variation between the lonely-count law at k = n/log(cn) and Poisson(1)",
        {integers("n_grid", {10000, 100000}, 3, "passenger counts"),
         real("c", 1.0, 1e-9, "scale constant c"),
         integer("replicas", 100000, 2, "Monte Carlo replicas per n"),
         real("tv_tolerance", 0.05, 0, "bound on the distance at the first n"), seed_param()},
        {"n", "k", "lonely", "empirical_pmf", "poisson_pmf"}},
       detail::run_poisson_approx},
      {{"almost_detachment",
        "lonely and support fractions at k = n^a for a > 1 approach 1",
        {integers("n_grid", {1000, 10000}, 2, "passenger counts, increasing"),
         real("exponent", 1.4, 1.0, "time exponent a"),
         integer("replicas", 1000, 2, "Monte Carlo replicas per n"),
         real("slack_constant", 3.0, 0, "fractions must exceed 1 - slack * n^{1-a}"),
         seed_param()},
        {"n", "k", "lonely_fraction", "lonely_se", "support_fraction", "support_se",
         "exact_lonely_fraction", "exact_support_fraction", "threshold"}},
       detail::run_almost_detachment},
      {{"zero_percent",
        "fraction of detachment states e(n,k)/k below and above the n^2 scale",
        {integers("n_grid", {100, 300, 1000}, 2, "passenger counts for the exact part"),
         real("exponent", 1.9, 1e-9, "exact part uses k = ceil(n^exponent)"),
         real("fraction_tolerance", 1e-3, 0, "bound on e(n,k)/k in the exact part"),
         integer("mc_n", 30, 2, "passenger count for the Monte Carlo part"),
         real("mc_k_factor", 20.0, 1e-9, "Monte Carlo horizon k = ceil(factor n^2)"),
         integer("mc_replicas", 1000, 2, "Monte Carlo replicas"),
         real("mc_threshold", 0.8, 0, "Monte Carlo mean of D/k must exceed this"), seed_param()},
        {"part", "n", "k", "fraction", "std_error", "exact_fraction"}},
       detail::run_zero_percent},
      {{"first_detachment_hist",
        "first detachment time distribution by simulation, with reference means",
        {integers("n_grid", {20, 40}, 1, "passenger counts"),
         integer("replicas", 10000, 2, "replicas per n"),
         integer("horizon", 100000, 1, "censoring horizon"),
         reals("reference_means", {322.0, 1270.0}, 0, "reference means, paired with n_grid"),
         real("relative_tolerance", 0.05, 0, "allowed relative deviation of the mean"),
         real("max_censored_fraction", 1e-3, 0, "allowed fraction of censored replicas"),
         seed_param()},
        {"n", "replica", "tau_hat", "censored"}},
       detail::run_first_detachment_hist},
      {{"beta_limits",
        "empirical laws of m_k/k and M_k/k against 1-(1-x)^n and x^n",
        {integer("n", 4, 1, "passengers"), integer("k", 10000, 1, "time"),
         integer("replicas", 100000, 2, "Monte Carlo replicas"),
         real("ks_tolerance", 0.01, 0, "bound on the Kolmogorov-Smirnov distance"),
         real("grid_step", 0.01, 1e-9, "x step of the emitted CDF table"), seed_param()},
        {"which", "x", "empirical_cdf", "limit_cdf"}},
       detail::run_beta_limits},
      {{"clumping_drop",
        "relative clumping: supermartingale drift, tail bound at k = cn, drop from log n",
        {integer("n", 100, 2, "passengers"), real("c", 1.0, 1e-9, "tail time k = floor(cn)"),
         reals("x_grid", {0.5, 1.0, 2.0}, 0, "tail thresholds x"),
         integer("tail_replicas", 100000, 2, "replicas for the tail estimate"),
         real("sigma", 3.0, 0, "tail estimate may exceed the bound by sigma standard errors"),
         real("drop_factor", 5.0, 1e-9, "drop checked at k = drop_factor * n"),
         real("drop_threshold", 1.0, 0, "mean relative clumping at the drop time must be below"),
         integer("curve_replicas", 1000, 2, "replicas per time for the curve"),
         integer("drift_n", 6, 2, "passengers for the drift check"),
         real("drift_k_factor", 5.0, 1e-9, "drift checked up to k = drift_k_factor * drift_n"),
         integer("drift_replicas", 20000, 2, "replicas for the drift check"), seed_param()},
        {"part", "n", "k", "x", "estimate", "std_error", "bound"}},
       detail::run_clumping_drop},
      {{"large_deviations",
        "single-term and union bounds on P(detached before cn), per-passenger exponent",
        {real("c", 2.0, 1.0, "time scale k = floor(cn)"),
         integers("n_grid", {40, 80}, 2, "passenger counts"),
         real("window_slack", 0.05, 0, "slack on both ends of the exponent window"),
         seed_param()},
        {"n", "k_max", "log_lower_per_n", "log_upper_per_n", "window_low", "window_high"}},
       detail::run_large_deviations},
      {{"tau_tail",
        "permanent detachment law: closed form for n=2, truncated product, tail n(n-1)/k",
        {integers("n_grid", {2, 5, 10}, 2, "passenger counts for the tail check"),
         integer("k_tail", 1000000, 1, "time of the tail check"),
         real("tail_tolerance", 0.01, 0, "relative deviation allowed in the tail"),
         integer("symbolic_k_max", 1000, 2, "n=2 closed form checked for k <= this"),
         integer("truncation_n_max", 4, 1, "truncated product checked for n <= this"),
         integer("truncation_k_max", 10, 1, "truncated product checked for n <= k <= this"),
         integer("truncation_factor", 1000, 2, "truncation point K = factor * k"),
         real("truncation_tolerance", 0.01, 0, "allowed gap between product and closed form"),
         seed_param()},
        {"part", "n", "k", "K", "value", "reference", "abs_error", "exact"}},
       detail::run_tau_tail},
  };
  return table;
}

const Entry* find_entry(const std::string& name) {
  for (const auto& e : entries()) {
    if (e.info.name == name) return &e;
  }
  return nullptr;
}

std::string kind_name(ParamKind k) {
  switch (k) {
    case ParamKind::integer: return "integer";
    case ParamKind::real: return "real";
    case ParamKind::integer_list: return "integer list";
    case ParamKind::real_list: return "real list";
  }
  return "";
}

Json normalize_scalar(const ParamSchema& s, const Json& v, bool integral) {
  const std::string where = "parameter '" + s.name + "'";
  if (!v.is_number()) throw SchemaError(where + ": expected a number, got " + v.dump());
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(where + ": must be finite");
  if (d < s.min_value) {
    std::ostringstream os;
    os << where << ": " << v.dump() << " is below the minimum " << s.min_value;
    throw SchemaError(os.str());
  }
  if (!integral) return Json(d);
  if (v.is_number_unsigned()) return v;
  if (v.is_number_integer()) return Json(v.get<std::int64_t>());  // negative ruled out above
  if (d != std::floor(d) || d > 9.0e18) {
    throw SchemaError(where + ": expected an integer, got " + v.dump());
  }
  return Json(static_cast<std::uint64_t>(d));
}

Json normalize(const ParamSchema& s, const Json& v) {
  switch (s.kind) {
    case ParamKind::integer: return normalize_scalar(s, v, true);
    case ParamKind::real: return normalize_scalar(s, v, false);
    case ParamKind::integer_list:
    case ParamKind::real_list: {
      if (v.is_number()) return normalize(s, Json::array({v}));  // lone value = one-element list
      if (!v.is_array() || v.empty()) {
        throw SchemaError("parameter '" + s.name + "': expected a non-empty list");
      }
      Json out = Json::array();
      for (const auto& x : v) out.push_back(normalize_scalar(s, x, s.kind == ParamKind::integer_list));
      return out;
    }
  }
  return v;
}

const ParamSchema& schema_for(const ExperimentInfo& info, const std::string& key) {
  for (const auto& p : info.params) {
    if (p.name == key) return p;
  }
  throw SchemaError("experiment '" + info.name + "' has no parameter '" + key + "'");
}

Json parse_override_value(const std::string& key, const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
  }
  if (text.find(',') != std::string::npos) {
    Json arr = Json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        arr.push_back(Json::parse(item));
      } catch (const Json::parse_error&) {
        throw SchemaError("--set " + key + ": cannot parse list element '" + item + "'");
      }
    }
    return arr;
  }
  throw SchemaError("--set " + key + ": cannot parse value '" + text + "'");
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string out = "\"";
      for (const char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
      }
      return out + "\"";
    }
  };
  return std::visit(Visitor{}, c);
}

Json cell_json(const Cell& c) {
  struct Visitor {
    Json operator()(std::monostate) const { return nullptr; }
    Json operator()(std::int64_t v) const { return v; }
    Json operator()(double v) const { return std::isfinite(v) ? Json(v) : Json(format_real(v)); }
    Json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

std::string column_type(const Table& t, std::size_t col) {
  for (const auto& row : t.rows) {
    switch (row[col].index()) {
      case 1: return "integer";
      case 2: return "real";
      case 3: return "text";
      default: break;
    }
  }
  return "empty";
}

std::string strip_extension(const std::string& path) {
  for (const char* ext : {".csv", ".json"}) {
    const std::string e(ext);
    if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0) {
      return path.substr(0, path.size() - e.size());
    }
  }
  return path;
}

}  // namespace

namespace detail {

std::uint64_t Params::integer(const std::string& name) const {
  return j_.at(name).get<std::uint64_t>();
}
double Params::real(const std::string& name) const { return j_.at(name).get<double>(); }
std::vector<std::uint64_t> Params::integers(const std::string& name) const {
  return j_.at(name).get<std::vector<std::uint64_t>>();
}
std::vector<double> Params::reals(const std::string& name) const {
  return j_.at(name).get<std::vector<double>>();
}

}  // namespace detail

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("Table::add: row width does not match the column count");
  }
  rows.push_back(std::move(row));
}

bool ExperimentReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const std::vector<ExperimentInfo>& registry() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> out;
    for (const auto& e : entries()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

const ExperimentInfo* find_experiment(const std::string& name) {
  for (const auto& info : registry()) {
    if (info.name == name) return &info;
  }
  return nullptr;
}

ExperimentSpec make_spec(const std::string& name, const Json& config,
                         const std::vector<std::string>& overrides) {
  const ExperimentInfo* info = find_experiment(name);
  if (info == nullptr) throw SchemaError("unknown experiment '" + name + "'");
  ExperimentSpec spec;
  spec.name = name;
  for (const auto& p : info->params) spec.parameters[p.name] = p.default_value;

  if (!config.is_null()) {
    if (!config.is_object()) throw SchemaError("config must be a JSON object");
    const Json* params = &config;
    if (config.contains("parameters")) {
      for (const auto& [key, value] : config.items()) {
        if (key == "name") {
          if (value != name) throw SchemaError("config names experiment " + value.dump());
        } else if (key == "output_path") {
          if (!value.is_string()) throw SchemaError("config output_path must be a string");
          spec.output_path = value.get<std::string>();
        } else if (key != "parameters") {
          throw SchemaError("unknown config key '" + key + "'");
        }
      }
      params = &config.at("parameters");
      if (!params->is_object()) throw SchemaError("config parameters must be a JSON object");
    }
    for (const auto& [key, value] : params->items()) {
      spec.parameters[key] = normalize(schema_for(*info, key), value);
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw SchemaError("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq);
    spec.parameters[key] = normalize(schema_for(*info, key), parse_override_value(key, o.substr(eq + 1)));
  }
  for (const auto& p : info->params) {
    spec.parameters[p.name] = normalize(p, spec.parameters[p.name]);
  }
  return spec;
}

void validate(const ExperimentSpec& spec) {
  const ExperimentInfo* info = find_experiment(spec.name);
  if (info == nullptr) throw SchemaError("unknown experiment '" + spec.name + "'");
  if (!spec.parameters.is_object()) throw SchemaError("parameters must be an object");
  for (const auto& [key, value] : spec.parameters.items()) {
    if (normalize(schema_for(*info, key), value) != value) {
      throw SchemaError("parameter '" + key + "' is not in normal form");
    }
  }
  for (const auto& p : info->params) {
    if (!spec.parameters.contains(p.name)) {
      throw SchemaError("parameter '" + p.name + "' is missing");
    }
  }
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.spec = spec;
  const Entry* e = find_entry(spec.name);
  report.table.columns = e->info.columns;
  e->run(detail::Params(spec.parameters), report);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!spec.output_path.empty()) write_outputs(report, spec.output_path);
  return report;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string provenance_tag(Provenance p) {
  switch (p) {
    case Provenance::paper: return "PAPER";
    case Provenance::trivial: return "TRIVIAL";
    case Provenance::derived: return "DERIVED";
  }
  return "";
}

Json to_json(const ExperimentReport& r) {
  Json j;
  j["experiment"] = r.spec.name;
  j["spec"] = {{"name", r.spec.name},
               {"parameters", r.spec.parameters},
               {"output_path", r.spec.output_path}};
  Json cols = Json::array();
  for (std::size_t i = 0; i < r.table.columns.size(); ++i) {
    cols.push_back({{"name", r.table.columns[i]}, {"type", column_type(r.table, i)}});
  }
  j["columns"] = cols;
  Json rows = Json::array();
  for (const auto& row : r.table.rows) {
    Json jr = Json::array();
    for (const auto& c : row) jr.push_back(cell_json(c));
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  Json refs = Json::array();
  for (const auto& ref : r.references) {
    refs.push_back({{"name", ref.name},
                    {"value", std::isfinite(ref.value) ? Json(ref.value) : Json(format_real(ref.value))},
                    {"provenance", provenance_tag(ref.provenance)},
                    {"note", ref.note}});
  }
  j["references"] = refs;
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back({{"name", v.name},
                        {"pass", v.pass},
                        {"measured", std::isfinite(v.measured) ? Json(v.measured)
                                                               : Json(format_real(v.measured))},
                        {"condition", v.condition}});
  }
  j["verdicts"] = verdicts;
  j["assumptions"] = r.assumptions;
  j["passed"] = r.passed();
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

void write_outputs(const ExperimentReport& report, const std::string& path) {
  const std::string base = strip_extension(path);
  const std::filesystem::path parent = std::filesystem::path(base).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  {
    std::ofstream csv(base + ".csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + base + ".csv");
    csv << to_csv(report.table);
  }
  std::ofstream js(base + ".json", std::ios::binary);
  if (!js) throw std::runtime_error("cannot write " + base + ".json");
  js << to_json(report).dump(2) << '\n';
}

std::string describe_schema(const ExperimentInfo& info) {
  std::ostringstream os;
  os << info.name << ": " << info.summary << '\n';
  for (const auto& p : info.params) {
    os << "  " << p.name << " (" << kind_name(p.kind) << ", >= " << p.min_value
       << ", default " << p.default_value.dump() << "): " << p.help << '\n';
  }
  os << "  columns: ";
  for (std::size_t i = 0; i < info.columns.size(); ++i) os << (i ? "," : "") << info.columns[i];
  os << '\n';
  return os.str();
}

void print_verdicts(std::ostream& os, const ExperimentReport& report) {
  for (const auto& v : report.verdicts) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v.measured);
    os << (v.pass ? "PASS " : "FAIL ") << v.name << ": measured " << buf
       << ", required " << v.condition << '\n';
  }
}

}  // namespace detach::harness
