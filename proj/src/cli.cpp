#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "detach/analytics.hpp"
#include "detach/harness.hpp"
#include "detach/oracle.hpp"
#include "detach/poissonized.hpp"
#include "detach/simulator.hpp"

namespace detach::harness {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest representation that reads back to the same double.
std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Accepts "p/q", integers and plain decimals; exact.
Rational parse_rational(const std::string& text) {
  try {
    if (text.find('/') != std::string::npos) {
      Rational q(text);
      q.canonicalize();
      if (q.get_den() == 0) throw UsageError("zero denominator");
      return q;
    }
    std::string digits = text;
    std::size_t scale = 0;
    if (const auto dot = text.find('.'); dot != std::string::npos) {
      digits = text.substr(0, dot) + text.substr(dot + 1);
      scale = text.size() - dot - 1;
    }
    Integer num(digits), den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, scale);
    Rational q(num, den);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw UsageError("cannot read '" + text + "' as a rational number");
  }
}

struct ExactArgs {
  std::optional<std::uint64_t> n, k, l, m;
  std::optional<std::string> z;
  std::optional<double> y, c, d, x, lambda, p, q;
  std::string which = "min";
  bool exact = false;

  template <typename T>
  T need(const std::optional<T>& v, const char* flag, const std::string& formula) const {
    if (!v) throw UsageError("formula '" + formula + "' requires --" + std::string(flag));
    return *v;
  }
};

using Formula = std::function<std::string(const ExactArgs&, const std::string&)>;

std::string pair_line(const std::string& a, const std::string& b) { return a + " " + b; }

const std::map<std::string, std::pair<std::string, Formula>>& formulas() {
  using A = ExactArgs;
  auto nk = [](const A& a, const std::string& f) {
    return ProcessParams(a.need(a.n, "n", f), a.need(a.k, "k", f));
  };
  auto real = [](double v) { return shortest(v); };
  static const std::map<std::string, std::pair<std::string, Formula>> table = {
      {"pi", {"P(L_k = n); --n --k", [=](const A& a, const std::string& f) {
                 return a.exact ? to_string(exact::pi_detached(nk(a, f))) : real(pi_detached(nk(a, f)));
               }}},
      {"p", {"P(L_{k-1} < n, L_k = n); --n --k", [=](const A& a, const std::string& f) {
                return a.exact ? to_string(exact::detachment_time_prob(nk(a, f)))
                               : real(detachment_time_prob(nk(a, f)));
              }}},
      {"pi-bounds", {"birthday bounds on log pi; --n --k", [=](const A& a, const std::string& f) {
                        const auto b = log_pi_bounds(nk(a, f));
                        return pair_line(real(b.lower), real(b.upper));
                      }}},
      {"joint", {"P(L_k = L_{k+l} = n); --n --k --l", [=](const A& a, const std::string& f) {
                    const auto n = a.need(a.n, "n", f), k = a.need(a.k, "k", f), l = a.need(a.l, "l", f);
                    return a.exact ? to_string(exact::joint_detached(n, k, l)) : real(joint_detached(n, k, l));
                  }}},
      {"cond", {"P(L_{k+l} = n | L_k = n); --n --k --l", [=](const A& a, const std::string& f) {
                   const auto n = a.need(a.n, "n", f), k = a.need(a.k, "k", f), l = a.need(a.l, "l", f);
                   return a.exact ? to_string(exact::cond_detached(n, k, k + l))
                                  : real(cond_detached(n, k, k + l));
                 }}},
      {"cond-given-not",
       {"P(L_{k+l} = n | L_k < n); --n --k --l", [=](const A& a, const std::string& f) {
          const auto n = a.need(a.n, "n", f), k = a.need(a.k, "k", f), l = a.need(a.l, "l", f);
          return a.exact ? to_string(exact::cond_detached_given_not(n, k, k + l))
                         : real(cond_detached_given_not(n, k, k + l));
        }}},
      {"triple", {"detached at k, k+l, k+l+m; --n --k --l --m", [=](const A& a, const std::string& f) {
                     const auto n = a.need(a.n, "n", f), k = a.need(a.k, "k", f);
                     const auto k2 = k + a.need(a.l, "l", f), k3 = k2 + a.need(a.m, "m", f);
                     return a.exact ? to_string(exact::triple_detached(n, k, k2, k3))
                                    : real(triple_detached(n, k, k2, k3));
                   }}},
      {"sandwich", {"detached at k and k+l+m, not at k+l; --n --k --l --m",
                    [=](const A& a, const std::string& f) {
                      const auto n = a.need(a.n, "n", f), k = a.need(a.k, "k", f);
                      const auto k2 = k + a.need(a.l, "l", f), k3 = k2 + a.need(a.m, "m", f);
                      return a.exact ? to_string(exact::sandwich_prob(n, k, k2, k3))
                                     : real(sandwich_prob(n, k, k2, k3));
                    }}},
      {"tau-cdf", {"P(tau <= k); --n --k", [=](const A& a, const std::string& f) {
                      return a.exact ? to_string(exact::tau_cdf(nk(a, f))) : real(tau_cdf(nk(a, f)));
                    }}},
      {"tau-survival", {"P(tau > k); --n --k", [=](const A& a, const std::string& f) {
                           return a.exact ? to_string(Rational(1) - exact::tau_cdf(nk(a, f)))
                                          : real(tau_survival(nk(a, f)));
                         }}},
      {"ie-cdf", {"exp(-1/x); --x", [=](const A& a, const std::string& f) {
                     return real(ie_cdf(a.need(a.x, "x", f)));
                   }}},
      {"expected-states", {"e(n,k), expected detachment states up to k; --n --k",
                           [=](const A& a, const std::string& f) {
                             const auto n = a.need(a.n, "n", f), k = a.need(a.k, "k", f);
                             return a.exact ? to_string(exact::expected_detachment_states(n, k))
                                            : real(expected_detachment_states(n, k));
                           }}},
      {"critical-k", {"critical time k(n,y); --n --y", [=](const A& a, const std::string& f) {
                         return real(critical_k(a.need(a.n, "n", f), a.need(a.y, "y", f)));
                       }}},
      {"critical-limit", {"exp(-y)/8; --y", [=](const A& a, const std::string& f) {
                             return real(critical_limit(a.need(a.y, "y", f)));
                           }}},
      {"lonely-moments", {"mean, variance and Var/mean^2 of L_k; --n --k",
                          [=](const A& a, const std::string& f) {
                            if (a.exact) {
                              const auto m = exact::lonely_moments(nk(a, f));
                              std::string out = to_string(m.mean) + " " + to_string(m.variance);
                              if (m.mean != 0) out += " " + to_string(m.concentration_ratio());
                              return out;
                            }
                            const auto m = lonely_moments(nk(a, f));
                            std::string out = real(m.mean) + " " + real(m.variance);
                            if (m.mean != 0) out += " " + real(m.concentration_ratio());
                            return out;
                          }}},
      {"support-tail", {"P(N_k >= m); --n --k --m", [=](const A& a, const std::string& f) {
                           const auto n = a.need(a.n, "n", f), k = a.need(a.k, "k", f), m = a.need(a.m, "m", f);
                           return a.exact ? to_string(exact::support_tail(n, k, m)) : real(support_tail(n, k, m));
                         }}},
      {"support-pmf", {"P(N_k = r), one line per r; --n --k", [=](const A& a, const std::string& f) {
                          std::string out;
                          if (a.exact) {
                            const auto v = exact::support_pmf(nk(a, f));
                            for (std::size_t r = 0; r < v.size(); ++r) {
                              out += (r ? "\n" : "") + std::to_string(r + 1) + " " + to_string(v[r]);
                            }
                          } else {
                            const auto v = support_pmf(nk(a, f));
                            for (std::size_t r = 0; r < v.size(); ++r) {
                              out += (r ? "\n" : "") + std::to_string(r + 1) + " " + real(v[r]);
                            }
                          }
                          return out;
                        }}},
      {"support-gf", {"E[z^N_k]; --n --k --z", [=](const A& a, const std::string& f) {
                         const auto z = a.need(a.z, "z", f);
                         const Rational zq = parse_rational(z);
                         return a.exact ? to_string(exact::support_gf(nk(a, f), zq))
                                        : real(support_gf(nk(a, f), to_double(zq)));
                       }}},
      {"support-moments", {"mean and variance of N_k; --n --k", [=](const A& a, const std::string& f) {
                              if (a.exact) {
                                const auto m = exact::support_moments(nk(a, f));
                                return to_string(m.mean) + " " + to_string(m.variance);
                              }
                              const auto m = support_moments(nk(a, f));
                              return real(m.mean) + " " + real(m.variance);
                            }}},
      {"minmax-cdf", {"limit CDF of m_k/k (--which min) or M_k/k (--which max); --n --x",
                      [=](const A& a, const std::string& f) {
                        if (a.which != "min" && a.which != "max") throw UsageError("--which must be min or max");
                        return real(minmax_limit_cdf(a.need(a.n, "n", f), a.need(a.x, "x", f),
                                                     a.which == "min" ? Extreme::min : Extreme::max));
                      }}},
      {"beta-stats", {"limit means of m_k/k, M_k/k, range, and the shared sd; --n",
                      [=](const A& a, const std::string& f) {
                        const auto b = beta_limit_stats(a.need(a.n, "n", f));
                        return real(b.mean_min) + " " + real(b.mean_max) + " " + real(b.mean_range) + " " +
                               real(b.sd);
                      }}},
      {"fidi-single", {"limit of P(L_{cn^2} = n); --c", [=](const A& a, const std::string& f) {
                          return real(fidi_limit_value(FidiKind::single, a.need(a.c, "c", f)));
                        }}},
      {"fidi-cond", {"limit of P(L_{dn^2} = n | L_{cn^2} = n); --c --d",
                     [=](const A& a, const std::string& f) {
                       return real(fidi_limit_value(FidiKind::cond_detached, a.need(a.c, "c", f),
                                                    a.need(a.d, "d", f)));
                     }}},
      {"fidi-cond-given-not", {"limit of P(L_{dn^2} = n | L_{cn^2} < n); --c --d",
                               [=](const A& a, const std::string& f) {
                                 return real(fidi_limit_value(FidiKind::cond_given_not, a.need(a.c, "c", f),
                                                              a.need(a.d, "d", f)));
                               }}},
      {"fidi-joint", {"limit of P(L_{cn^2} = L_{dn^2} = n); --c --d", [=](const A& a, const std::string& f) {
                         return real(fidi_limit_value(FidiKind::joint, a.need(a.c, "c", f), a.need(a.d, "d", f)));
                       }}},
      {"full-detachment", {"Poissonized P(all buses hold at most one); --lambda --k",
                           [=](const A& a, const std::string& f) {
                             return real(full_detachment_prob(a.need(a.lambda, "lambda", f), a.need(a.k, "k", f)));
                           }}},
      {"no-lonely", {"Poissonized P(no lonely passenger); --lambda --k", [=](const A& a, const std::string& f) {
                       return real(no_lonely_prob(a.need(a.lambda, "lambda", f), a.need(a.k, "k", f)));
                     }}},
      {"no-lonely-rate", {"(1 - x e^{-x})^{1/x}; --x", [=](const A& a, const std::string& f) {
                            return real(no_lonely_rate(a.need(a.x, "x", f)));
                          }}},
      {"binomial-dominance",
       {"Bin(m,q) below Bin(n,p) by the criterion and by CDFs; --m --q --n --p",
        [=](const A& a, const std::string& f) {
          const BinomialSpec y(a.need(a.m, "m", f), a.need(a.q, "q", f));
          const BinomialSpec x(a.need(a.n, "n", f), a.need(a.p, "p", f));
          return std::string(najnudel_dominates(y, x) ? "true" : "false") + " " +
                 (dominance_cdf_check(y, x) ? "true" : "false");
        }}},
      {"poisson-dominance", {"Poissonian L_k below L_{k+l}; --lambda --k --l",
                             [=](const A& a, const std::string& f) {
                               const auto k = a.need(a.k, "k", f);
                               return std::string(poissonian_lonely_dominance(a.need(a.lambda, "lambda", f), k,
                                                                              k + a.need(a.l, "l", f))
                                                      ? "true"
                                                      : "false");
                             }}},
      {"stirling2", {"S(n, k); --n --k", [=](const A& a, const std::string& f) {
                        return stirling2(static_cast<std::uint32_t>(a.need(a.n, "n", f)),
                                         static_cast<std::uint32_t>(a.need(a.k, "k", f)))
                            .get_str();
                      }}},
      {"falling-factorial", {"(k)_n = k (k-1) ... (k-n+1); --k --n", [=](const A& a, const std::string& f) {
                                return falling_factorial(static_cast<std::int64_t>(a.need(a.k, "k", f)),
                                                         a.need(a.n, "n", f))
                                    .get_str();
                              }}},
      {"two-f-zero", {"2F0(-n, -l; ; z) truncated series; --n --l --z", [=](const A& a, const std::string& f) {
                         const auto n = a.need(a.n, "n", f), l = a.need(a.l, "l", f);
                         const Rational zq = parse_rational(a.need(a.z, "z", f));
                         return a.exact ? to_string(two_f_zero(n, l, zq)) : real(to_double(two_f_zero(n, l, zq)));
                       }}},
  };
  return table;
}

std::string formula_list() {
  std::ostringstream os;
  os << "formulas:\n";
  for (const auto& [name, entry] : formulas()) os << "  " << name << ": " << entry.first << '\n';
  return os.str();
}

Json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UsageError("config file " + path + " is not valid JSON: " + e.what());
  }
}

int finish_report(std::ostream& out, const ExperimentReport& r, bool check) {
  print_verdicts(out, r);
  out << (r.passed() ? "PASSED" : "FAILED") << " " << r.spec.name << " in " << shortest(r.wall_seconds)
      << " s\n";
  return check && !r.passed() ? 2 : 0;
}

void print_pmf_line(std::ostream& out, const Rational& m) {
  out << to_string(m) << ',' << shortest(to_double(m)) << '\n';
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact analytics, enumeration oracle, simulation and experiments for the detachment process",
               "detachment"};
  app.require_subcommand(1);

  ExactArgs ea;
  std::string formula;
  auto* exact_cmd = app.add_subcommand("exact", "evaluate a closed form (see 'exact list')");
  exact_cmd->add_option("formula", formula, "formula name, or 'list'")->required();
  exact_cmd->add_option("--n", ea.n, "passengers");
  exact_cmd->add_option("--k", ea.k, "time (bus count)");
  exact_cmd->add_option("--l", ea.l, "gap to the second time");
  exact_cmd->add_option("--m", ea.m, "support level, third-time gap, or binomial trials");
  exact_cmd->add_option("--z", ea.z, "generating-function argument (p/q or decimal)");
  exact_cmd->add_option("--y", ea.y, "critical window offset");
  exact_cmd->add_option("--c", ea.c, "first time scale / n^2");
  exact_cmd->add_option("--d", ea.d, "second time scale / n^2");
  exact_cmd->add_option("--x", ea.x, "real argument");
  exact_cmd->add_option("--lambda", ea.lambda, "Poisson intensity");
  exact_cmd->add_option("--p", ea.p, "success probability of X");
  exact_cmd->add_option("--q", ea.q, "success probability of Y");
  exact_cmd->add_option("--which", ea.which, "min or max");
  exact_cmd->add_flag("--exact", ea.exact, "print the exact rational");

  std::string which;
  std::uint64_t on = 0, ok = 0, ol = 0, om = 0, oK = 0, oseed = 1;
  bool ocheck = false;
  std::string oout;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force enumeration and cross-checks");
  oracle_cmd
      ->add_option("which", which,
                   "single | two-time | three-time | tau-truncated | verify | dominance")
      ->required();
  oracle_cmd->add_option("--n", on, "passengers (verify: largest n, default 5)");
  oracle_cmd->add_option("--k", ok, "first time (verify: largest k, default 6)");
  oracle_cmd->add_option("--l", ol, "gap to the second time (verify: largest gap, default 3)");
  oracle_cmd->add_option("--m", om, "gap to the third time");
  oracle_cmd->add_option("--K", oK, "truncation point (default 1000 k)");
  oracle_cmd->add_option("--seed", oseed, "seed for the random dominance triples");
  oracle_cmd->add_option("--out", oout, "write CSV and JSON reports to this path");
  oracle_cmd->add_flag("--check", ocheck, "exit 2 when a verdict fails");

  std::uint64_t sn = 0, shorizon = 0, sreps = 0, sseed = 1, stime = 0;
  std::vector<std::uint64_t> sample_times;
  std::string estimand;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate trajectories");
  sim_cmd->add_option("--n", sn, "passengers")->required();
  sim_cmd->add_option("--horizon", shorizon, "last simulated time")->required();
  sim_cmd->add_option("--replicas", sreps, "number of replicas")->required();
  sim_cmd->add_option("--seed", sseed, "master seed")->required();
  sim_cmd->add_option("--sample-times", sample_times, "times at which observables are recorded")
      ->delimiter(',');
  sim_cmd->add_option("--estimand", estimand, "print only the mean and standard error of this estimand");
  sim_cmd->add_option("--time", stime, "time for *_at estimands");

  std::string ename, config_path, eout;
  std::vector<std::string> sets;
  bool echeck = false, no_files = false;
  auto* exp_cmd = app.add_subcommand("experiment", "run a named experiment");
  exp_cmd->add_option("name", ename, "experiment name (see 'list')")->required();
  exp_cmd->add_option("--config", config_path, "JSON config file");
  exp_cmd->add_option("--set", sets, "parameter override key=value (repeatable)");
  exp_cmd->add_option("--out", eout, "output path prefix (default: the experiment name)");
  exp_cmd->add_flag("--no-files", no_files, "do not write CSV/JSON files");
  exp_cmd->add_flag("--check", echeck, "exit 2 when a verdict fails");

  bool schema = false;
  auto* list_cmd = app.add_subcommand("list", "list the registered experiments");
  list_cmd->add_flag("--schema", schema, "include parameter schemas and CSV columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* s : app.get_subcommands()) target = s;
    out << target->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    const CLI::App* target = &app;
    for (const auto* s : app.get_subcommands()) target = s;
    err << target->help();
    return 1;
  }

  try {
    if (exact_cmd->parsed()) {
      if (formula == "list") {
        out << formula_list();
        return 0;
      }
      const auto it = formulas().find(formula);
      if (it == formulas().end()) throw UsageError("unknown formula '" + formula + "'\n" + formula_list());
      out << it->second.second(ea, formula) << '\n';
      return 0;
    }

    if (oracle_cmd->parsed()) {
      auto need = [&](std::uint64_t v, const char* flag) {
        if (v == 0) throw UsageError("oracle " + which + " requires --" + flag + " >= 1");
        return v;
      };
      if (which == "verify" || which == "dominance") {
        ExperimentReport r = which == "verify"
                                 ? oracle_verify(on ? on : 5, ok ? ok : 6, ol ? ol : 3)
                                 : dominance_checks(oseed, 1000, on ? on : 5);
        if (!oout.empty()) write_outputs(r, oout);
        return finish_report(out, r, ocheck);
      }
      if (which == "single") {
        const auto pmf = oracle::enumerate_single_time(need(on, "n"), need(ok, "k"));
        out << "lonely,support,clump,probability,value\n";
        for (const auto& [o, m] : pmf.mass) {
          out << o.lonely << ',' << o.support << ',' << o.clump << ',';
          print_pmf_line(out, m);
        }
        return 0;
      }
      if (which == "two-time") {
        const auto t = oracle::enumerate_two_time(need(on, "n"), need(ok, "k"), need(ol, "l"));
        out << "quantity,probability,value\n";
        for (const auto& [name, v] : {std::pair<const char*, const Rational*>{"joint_detached", &t.joint_detached},
                                      {"pi_first", &t.pi_first},
                                      {"pi_second", &t.pi_second},
                                      {"cond_detached", &t.cond_detached},
                                      {"cond_given_not", &t.cond_given_not},
                                      {"into_detachment", &t.into_detachment}}) {
          out << name << ',';
          print_pmf_line(out, *v);
        }
        return 0;
      }
      if (which == "three-time") {
        const auto k = need(ok, "k"), k2 = k + need(ol, "l"), k3 = k2 + need(om, "m");
        const auto t = oracle::enumerate_three_time(need(on, "n"), k, k2, k3);
        out << "quantity,probability,value\ntriple,";
        print_pmf_line(out, t.triple);
        out << "sandwich,";
        print_pmf_line(out, t.sandwich);
        return 0;
      }
      if (which == "tau-truncated") {
        const auto k = need(ok, "k");
        const auto t = oracle::tau_cdf_truncated(need(on, "n"), k, oK ? oK : 1000 * k);
        out << "quantity,probability,value\ntruncated,";
        print_pmf_line(out, t.truncated);
        out << "exact,";
        print_pmf_line(out, t.exact);
        return 0;
      }
      throw UsageError("unknown oracle '" + which +
                       "'; expected single, two-time, three-time, tau-truncated, verify or dominance");
    }

    if (sim_cmd->parsed()) {
      if (!estimand.empty()) {
        const auto e = parse_estimand(estimand);
        if (!e) throw UsageError("unknown estimand '" + estimand + "'");
        const McEstimate est = mc_estimate(sn, shorizon, sreps, {*e, stime}, sseed);
        out << "estimand,time,mean,std_error,replicas,censored\n"
            << estimand << ',' << stime << ',' << shortest(est.mean) << ',' << shortest(est.std_error)
            << ',' << est.replicas << ',' << est.censored << '\n';
        return 0;
      }
      if (sn == 0 || shorizon == 0) throw UsageError("simulate requires --n >= 1 and --horizon >= 1");
      for (const auto t : sample_times) {
        if (t == 0 || t > shorizon) throw UsageError("sample times must lie in [1, horizon]");
      }
      std::vector<TrajectoryRecord> recs(sreps);
      parallel_for(sreps, [&](std::uint64_t i) {
        RngStream rng(sseed, i);
        recs[i] = run_trajectory(sn, shorizon, sample_times, rng);
      });
      auto opt = [](const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : std::string(); };
      out << "replica,first_detachment,last_detachment,detachment_states,censored";
      if (!sample_times.empty()) out << ",time,lonely,support,min_bus,max_bus,range,clump,rc";
      out << '\n';
      for (std::uint64_t i = 0; i < sreps; ++i) {
        const auto& r = recs[i];
        const std::string head = std::to_string(i) + ',' + opt(r.first_detachment) + ',' +
                                 opt(r.last_detachment_seen) + ',' +
                                 std::to_string(r.detachment_state_count) + ',' + (r.censored ? "1" : "0");
        if (sample_times.empty()) {
          out << head << '\n';
          continue;
        }
        for (const auto& o : r.sampled_series) {
          out << head << ',' << o.k << ',' << o.lonely << ',' << o.support << ',' << o.min_bus << ','
              << o.max_bus << ',' << o.range << ',' << o.clump << ',' << shortest(o.rc) << '\n';
        }
      }
      return 0;
    }

    if (exp_cmd->parsed()) {
      const ExperimentInfo* info = find_experiment(ename);
      if (info == nullptr) {
        std::ostringstream os;
        os << "unknown experiment '" << ename << "'; registered:";
        for (const auto& e : registry()) os << ' ' << e.name;
        throw UsageError(os.str());
      }
      ExperimentSpec spec;
      try {
        spec = make_spec(ename, config_path.empty() ? Json::object() : read_config(config_path), sets);
      } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n' << describe_schema(*info);
        return 1;
      }
      if (no_files) {
        spec.output_path.clear();
      } else if (!eout.empty()) {
        spec.output_path = eout;
      } else if (spec.output_path.empty()) {
        spec.output_path = ename;
      }
      ExperimentReport r;
      try {
        r = run_experiment(spec);
      } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n' << describe_schema(*info);
        return 1;
      }
      return finish_report(out, r, echeck);
    }

    if (list_cmd->parsed()) {
      for (const auto& e : registry()) {
        if (schema) {
          out << describe_schema(e);
        } else {
          out << e.name << '\n';
        }
      }
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return 1;
  } catch (const oracle::BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace detach::harness
