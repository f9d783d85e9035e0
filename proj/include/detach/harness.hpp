#pragma once

// Named, reproducible experiments. Each experiment validates its parameters
// against a fixed schema, computes a tidy result table, and judges the
// outcome against tolerances that are themselves parameters.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace detach::harness {

using Json = nlohmann::ordered_json;

/// Bad experiment name, unknown parameter, wrong type or out-of-range value.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ParamKind { integer, real, integer_list, real_list };

struct ParamSchema {
  std::string name;
  ParamKind kind;
  Json default_value;
  double min_value;  // applies to every element of a list
  std::string help;
};

struct ExperimentInfo {
  std::string name;
  std::string summary;
  std::vector<ParamSchema> params;
  std::vector<std::string> columns;  // CSV column contract
};

struct ExperimentSpec {
  std::string name;
  Json parameters = Json::object();  // complete after make_spec
  std::string output_path;           // "<path>.csv" and "<path>.json"; empty = no files
};

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  void add(std::vector<Cell> row);
};

enum class Provenance { paper, trivial, derived };

struct ReferenceValue {
  std::string name;
  double value = 0.0;
  Provenance provenance = Provenance::derived;
  std::string note;
};

struct Verdict {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  std::string condition;  // human-readable tolerance, e.g. "< 0.02"
};

struct ExperimentReport {
  ExperimentSpec spec;
  Table table;
  std::vector<ReferenceValue> references;
  std::vector<Verdict> verdicts;
  std::vector<std::string> assumptions;
  double wall_seconds = 0.0;

  bool passed() const;
};

/// The 12 registered experiments, in a fixed order.
const std::vector<ExperimentInfo>& registry();
/// nullptr when unknown.
const ExperimentInfo* find_experiment(const std::string& name);

/// Builds a validated spec: schema defaults, then `config` (either a flat
/// parameter object or {"name", "parameters", "output_path"}), then
/// `overrides` of the form key=value (value: number, comma list or JSON).
ExperimentSpec make_spec(const std::string& name, const Json& config = Json::object(),
                         const std::vector<std::string>& overrides = {});

/// Throws SchemaError unless every parameter matches the schema and all
/// schema parameters are present.
void validate(const ExperimentSpec& spec);

/// Validates, runs and, when spec.output_path is set, writes CSV and JSON.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Header row plus one line per row; reals with 17 significant digits.
std::string to_csv(const Table& table);
Json to_json(const ExperimentReport& report);
void write_outputs(const ExperimentReport& report, const std::string& path);

/// Text rendering of a schema, for usage errors and `list --schema`.
std::string describe_schema(const ExperimentInfo& info);

std::string provenance_tag(Provenance p);

/// Compact verdict summary: one line per verdict.
void print_verdicts(std::ostream& os, const ExperimentReport& report);

// Cross-checks that are not experiments in the registry.

/// Every closed form against exhaustive enumeration, by exact rational
/// equality: single-time quantities for n <= n_max, k <= k_max; two-time
/// quantities additionally for gaps l <= l_max; three-time quantities for
/// n <= 4 with k1 <= 4 and gaps <= 2.
ExperimentReport oracle_verify(std::uint64_t n_max = 5, std::uint64_t k_max = 6,
                               std::uint64_t l_max = 3);

/// Dominance facts: binomial criterion vs CDF comparison on the full grid,
/// the Poissonian ordering on random triples, and exact ordering of the
/// lonely and support laws at consecutive times (n, k <= n_max).
ExperimentReport dominance_checks(std::uint64_t seed = 1, std::uint64_t random_triples = 1000,
                                  std::uint64_t n_max = 5);

/// Command-line front end. Returns 0 on success, 1 on usage or domain
/// errors, 2 when --check was given and a verdict failed.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace detach::harness
