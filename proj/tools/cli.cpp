#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "logext/chain_model.hpp"
#include "logext/error.hpp"
#include "logext/exact_solver.hpp"
#include "logext/io.hpp"
#include "logext/limit_laws.hpp"
#include "logext/simulator.hpp"
#include "logext/validation.hpp"

namespace logext::cli {
namespace {

using json = nlohmann::ordered_json;

struct Options {
  std::int64_t n = 0;
  double r = -1.0;
  std::optional<std::int64_t> x0;
  std::size_t replicates = 1000;
  std::uint64_t seed = kDefaultSeed;
  double t_cap = sim::kDefaultTCap;
  unsigned threads = 0;
  std::string format;
  std::string output;
  std::string case_id;
  std::optional<double> tolerance;
  std::string model = "logistic";
  std::string conditioning = "none";
  bool path = false;
  std::size_t points = 201;
  std::vector<std::int64_t> ns;
  std::vector<double> rs;
  std::string n_range;
  std::string r_range;
  laws::DispatchPolicy policy;
};

ExecutionOptions exec_of(const Options& o) {
  ExecutionOptions e;
  e.threads = o.threads;
  return e;
}

std::filesystem::path resolve_output(const std::string& output) {
  std::filesystem::path p(output);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("LOGEXT_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
      p = std::filesystem::path(dir) / p;
    }
  }
  return p;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open output file " + p.string());
  f << content;
}

// Writes to --output when given, standard output otherwise. Returns the file path or empty.
std::filesystem::path emit(const Options& o, const std::string& content, std::ostream& out) {
  if (o.output.empty()) {
    out << content;
    return {};
  }
  const auto p = resolve_output(o.output);
  write_file(p, content);
  return p;
}

json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

void require_params(const Options& o) {
  if (o.n < 1) throw InvalidArgument("--n must be >= 1");
  if (!(o.r >= 0.0) || !std::isfinite(o.r)) throw InvalidArgument("--r must be finite and >= 0");
  if (o.x0 && (*o.x0 < 1 || *o.x0 > o.n)) throw InvalidArgument("--x0 must lie in [1, n]");
}

struct Analysis {
  ModelParams params;
  std::optional<double> h_plus, h_minus;
  std::optional<double> log_p_star, L_star, log_L_star, log_E_star_o, log_E_star_asymptotic;
  std::optional<double> log_mean_extinction;
  std::optional<laws::LimitLaw> law;
};

Analysis analyze_instance(std::int64_t n, double r, std::optional<std::int64_t> x0, const laws::DispatchPolicy& policy) {
  Analysis a;
  a.params = make_params(n, r);
  const auto& p = a.params;
  if (p.supercritical()) a.log_E_star_asymptotic = laws::log_E_star_asymptotic(p);
  if (r > 0.0 && n <= policy.exact_max_n) {
    const exact::LogNuTable table(p);
    if (x0) a.log_mean_extinction = exact::log_mean_extinction_exact(table, *x0);
    if (p.supercritical() && *p.X_star >= 1) {
      const auto h = exact::hitting_probs(table);
      if (x0 && *x0 <= *p.X_star) {
        a.h_plus = h.h_plus[static_cast<std::size_t>(*x0)];
        a.h_minus = h.h_minus[static_cast<std::size_t>(*x0)];
      }
      if (*p.X_star >= 2) {
        a.log_p_star = exact::log_p_star_exact(table, h);
        a.L_star = exact::L_star_exact(table, h);
        a.log_L_star = std::log(*a.L_star);
        a.log_E_star_o = exact::log_sojourn_expectation(table, h);
      }
    }
  }
  if (x0) a.law = laws::predict_law(p, *x0, policy);
  return a;
}

json law_json(const laws::LimitLaw& law) {
  json j;
  j["case_tag"] = law.case_tag;
  j["scale"] = number_or_null(law.scale_s);
  j["log_scale"] = law.log_scale_s;
  j["shift"] = law.shift_t;
  j["support"] = law.support == laws::Support::AllReals ? "AllReals" : "NonnegativeReals";
  j["rapid_weight"] = number_or_null(law.rapid_weight);
  return j;
}

json analysis_json(const Analysis& a, std::optional<std::int64_t> x0) {
  const auto& p = a.params;
  json j;
  j["n"] = p.n;
  j["r"] = p.r;
  j["x0"] = x0 ? json(*x0) : json(nullptr);
  j["phase"] = std::string(to_string(classify_phase(p).phase));
  j["c"] = p.c;
  j["x_star"] = number_or_null(p.x_star);
  j["X_star"] = p.X_star ? json(*p.X_star) : json(nullptr);
  j["V_star"] = number_or_null(p.V_star);
  j["h_plus"] = number_or_null(a.h_plus);
  j["h_minus"] = number_or_null(a.h_minus);
  j["log_p_star"] = number_or_null(a.log_p_star);
  j["L_star"] = number_or_null(a.L_star);
  j["log_E_star_o"] = number_or_null(a.log_E_star_o);
  j["log_E_star_asymptotic"] = number_or_null(a.log_E_star_asymptotic);
  j["log_mean_extinction"] = number_or_null(a.log_mean_extinction);
  j["mean_extinction"] = a.log_mean_extinction ? number_or_null(std::exp(*a.log_mean_extinction)) : json(nullptr);
  j["law"] = a.law ? law_json(*a.law) : json(nullptr);
  return j;
}

std::string csv_field(std::optional<double> v) {
  return v && std::isfinite(*v) ? format_double(*v) : std::string();
}

constexpr const char* kAnalyzeCsvHeader =
    "n,r,x0,phase,c,X_star,V_star,h_minus,log_p_star,log_L_star,log_E_star_o,log_E_star_asymptotic,"
    "log_mean_extinction,case_tag\n";

std::string analysis_csv_row(const Analysis& a, std::optional<std::int64_t> x0) {
  const auto& p = a.params;
  std::ostringstream s;
  s << p.n << ',' << format_double(p.r) << ',' << (x0 ? std::to_string(*x0) : "") << ','
    << to_string(classify_phase(p).phase) << ',' << format_double(p.c) << ','
    << (p.X_star ? std::to_string(*p.X_star) : "") << ',' << csv_field(p.V_star) << ',' << csv_field(a.h_minus) << ','
    << csv_field(a.log_p_star) << ',' << csv_field(a.log_L_star) << ',' << csv_field(a.log_E_star_o) << ','
    << csv_field(a.log_E_star_asymptotic) << ',' << csv_field(a.log_mean_extinction) << ','
    << (a.law ? a.law->case_tag : "") << '\n';
  return s.str();
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  require_params(o);
  const auto a = analyze_instance(o.n, o.r, o.x0, o.policy);
  if (o.format == "csv") {
    emit(o, std::string(kAnalyzeCsvHeader) + analysis_csv_row(a, o.x0), out);
  } else {
    emit(o, analysis_json(a, o.x0).dump(2) + "\n", out);
  }
  err << "analyze: n=" << o.n << " r=" << format_double(o.r) << " phase "
      << to_string(classify_phase(a.params).phase) << "\n";
  return 0;
}

sim::Conditioning parse_conditioning(const std::string& s) {
  if (s == "none") return sim::Conditioning::None;
  if (s == "zero-first") return sim::Conditioning::HitsZeroFirst;
  if (s == "xstar-first") return sim::Conditioning::HitsXstarFirst;
  throw InvalidArgument("unknown conditioning " + s);
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  if (!o.x0) throw InvalidArgument("simulate needs --x0");
  if (!(o.t_cap > 0.0)) throw InvalidArgument("--t-cap must be positive");
  if (o.replicates < 1) throw InvalidArgument("--replicates must be >= 1");
  BDRateSpec spec;
  if (o.model == "bbp") {
    if (!(o.r >= 0.0) || !std::isfinite(o.r)) throw InvalidArgument("--r must be finite and >= 0");
    if (*o.x0 < 1) throw InvalidArgument("--x0 must be >= 1");
    spec = BDRateSpec::bbp(o.r);
  } else if (o.model == "pure-death") {
    if (o.n < 1 || *o.x0 < 1 || *o.x0 > o.n) throw InvalidArgument("pure-death needs 1 <= x0 <= n");
    spec = BDRateSpec::pure_death(o.n);
  } else if (o.model == "logistic") {
    require_params(o);
    spec = BDRateSpec::logistic(make_params(o.n, o.r));
  } else {
    throw InvalidArgument("unknown model " + o.model);
  }
  const auto conditioning = parse_conditioning(o.conditioning);
  if (conditioning != sim::Conditioning::None && o.model != "logistic") {
    throw InvalidArgument("conditioning needs the logistic model");
  }

  if (o.path) {
    if (conditioning != sim::Conditioning::None) throw InvalidArgument("--path does not support conditioning");
    const auto path = sim::simulate_path(spec, *o.x0, o.seed, o.t_cap);
    std::ostringstream s;
    sim::write_path_csv(s, path);
    emit(o, s.str(), out);
    err << "simulate: path with " << path.states.size() << " states, terminal " << sim::to_string(path.terminal)
        << "\n";
    return 0;
  }

  const auto samples = conditioning == sim::Conditioning::None
                           ? sim::sample_extinction(spec, *o.x0, o.replicates, o.seed, o.t_cap, exec_of(o))
                           : sim::sample_conditioned(spec.params, *o.x0, conditioning, o.replicates, o.seed, o.t_cap,
                                                     exec_of(o));
  std::ostringstream s;
  sim::write_samples_csv(s, samples);
  const auto file = emit(o, s.str(), out);
  if (!file.empty()) write_file(file.string() + ".json", sim::samples_sidecar_json(samples));
  err << "simulate: " << samples.values.size() << " values, " << samples.meta.censored_count << " censored\n";
  return 0;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream& err) {
  require_params(o);
  if (!o.x0) throw InvalidArgument("predict needs --x0");
  if (o.points < 2) throw InvalidArgument("--points must be >= 2");
  const auto law = laws::predict_law(make_params(o.n, o.r), *o.x0, o.policy);
  const double lo = laws::law_quantile(law, 1e-3);
  const double hi = laws::law_quantile(law, 1.0 - 1e-3);
  std::vector<double> ws(o.points);
  for (std::size_t i = 0; i < o.points; ++i) {
    ws[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(o.points - 1);
  }
  if (o.format == "json") {
    json j = law_json(law);
    j["grid"] = json::array();
    for (double w : ws) j["grid"].push_back({{"w", w}, {"t", number_or_null(law.unscale(w))}, {"F", law.cdf(w)}});
    emit(o, j.dump(2) + "\n", out);
  } else {
    std::ostringstream s;
    s << "w,t,F\n";
    for (double w : ws) s << format_double(w) << ',' << format_double(law.unscale(w)) << ',' << format_double(law.cdf(w)) << '\n';
    emit(o, s.str(), out);
  }
  err << "predict: " << law.case_tag << ", scale " << format_double(law.scale_s) << ", shift "
      << format_double(law.shift_t) << "\n";
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err, bool replicates_given) {
  if (!validation::is_known_case(o.case_id)) throw InvalidArgument("unknown case id " + o.case_id);
  const auto preset = validation::preset(o.case_id);
  const std::size_t reps = replicates_given ? o.replicates : preset.replicates;
  if (reps < 1) throw InvalidArgument("--replicates must be >= 1");
  const auto report = validation::validate_theorem(o.case_id, preset.sequence, reps, o.seed, o.tolerance, exec_of(o));
  emit(o, report.to_json(), out);
  err << "validate " << o.case_id << ": " << validation::to_string(report.verdict) << "\n";
  switch (report.verdict) {
    case validation::Verdict::Pass: return 0;
    case validation::Verdict::Fail: return 1;
    case validation::Verdict::Inconclusive: return 3;
  }
  return 1;
}

// "lo:hi:count", count >= 1; count == 1 yields lo.
std::vector<double> parse_range(const std::string& s, const char* flag) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string(flag) + " expects lo:hi:count, got " + s);
    }
  }
  if (parts.size() != 3 || !(parts[2] >= 1.0) || parts[2] != std::floor(parts[2]) || !(parts[1] >= parts[0])) {
    throw InvalidArgument(std::string(flag) + " expects lo:hi:count with lo <= hi and integer count >= 1");
  }
  const auto count = static_cast<std::size_t>(parts[2]);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = count == 1 ? parts[0] : parts[0] + (parts[1] - parts[0]) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<std::int64_t> ns = o.ns;
  std::vector<double> rs = o.rs;
  if (!o.n_range.empty()) {
    for (double v : parse_range(o.n_range, "--n-range")) ns.push_back(std::llround(v));
  }
  if (!o.r_range.empty()) {
    for (double v : parse_range(o.r_range, "--r-range")) rs.push_back(v);
  }
  if (ns.empty() || rs.empty()) throw InvalidArgument("sweep needs n values (--ns or --n-range) and r values (--rs or --r-range)");
  for (auto n : ns) {
    if (n < 1) throw InvalidArgument("sweep n values must be >= 1");
    if (o.x0 && (*o.x0 < 1 || *o.x0 > n)) throw InvalidArgument("--x0 must lie in [1, n] for every n");
  }
  for (double r : rs) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("sweep r values must be finite and >= 0");
  }
  std::string body = kAnalyzeCsvHeader;
  for (auto n : ns) {
    for (double r : rs) body += analysis_csv_row(analyze_instance(n, r, o.x0, o.policy), o.x0);
  }
  emit(o, body, out);
  err << "sweep: " << ns.size() * rs.size() << " rows\n";
  return 0;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--n", o.n, "Carrying capacity");
  sub->add_option("--r", o.r, "Reproductive rate");
  sub->add_option("--x0", o.x0, "Initial state");
  sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  sub->add_option("--output,-o", o.output, "Output file (default: standard output)");
}

void add_policy(CLI::App* sub, Options& o) {
  auto& p = o.policy;
  sub->add_option("--phase-cutoff", p.phase_cutoff, "Phase cutoff on |c|")->capture_default_str();
  sub->add_option("--gamma-x0-bounded", p.gamma_x0_bounded, "gamma X0 below this counts as bounded")->capture_default_str();
  sub->add_option("--small-delta", p.small_delta, "delta below this counts as vanishing")->capture_default_str();
  sub->add_option("--x0-constant", p.x0_constant, "X0 below this counts as constant")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Extinction statistics of the stochastic logistic birth-death chain", "logext"};
  app.require_subcommand(1);

  auto* analyze = app.add_subcommand("analyze", "Exact statistics and the predicted limit law (JSON)");
  add_common(analyze, o);
  add_policy(analyze, o);
  analyze->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* simulate = app.add_subcommand("simulate", "Extinction-time samples (CSV) with a JSON sidecar");
  add_common(simulate, o);
  simulate->add_option("--replicates", o.replicates, "Number of replicates")->capture_default_str();
  simulate->add_option("--t-cap", o.t_cap, "Censoring cap")->capture_default_str();
  simulate->add_option("--model", o.model, "logistic, bbp or pure-death")
      ->check(CLI::IsMember({"logistic", "bbp", "pure-death"}))
      ->capture_default_str();
  simulate->add_option("--conditioning", o.conditioning, "none, zero-first or xstar-first")
      ->check(CLI::IsMember({"none", "zero-first", "xstar-first"}))
      ->capture_default_str();
  simulate->add_flag("--path", o.path, "Write one path (time,state) instead of samples");

  auto* predict = app.add_subcommand("predict", "Predicted limit CDF on a grid (CSV)");
  add_common(predict, o);
  add_policy(predict, o);
  predict->add_option("--points", o.points, "Grid points")->capture_default_str();
  predict->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"json", "csv"}));

  auto* validate = app.add_subcommand("validate", "Validate one theorem case (JSON report)");
  validate->add_option("--case", o.case_id, "Case id")->required();
  auto* vreps_opt = validate->add_option("--replicates", o.replicates, "Replicates per instance (default: preset)");
  validate->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  validate->add_option("--tolerance", o.tolerance, "KS tolerance (default: per case)");
  validate->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  validate->add_option("--output,-o", o.output, "Output file (default: standard output)");

  auto* sweep = app.add_subcommand("sweep", "Analyze over a grid of (n, r) (CSV)");
  sweep->add_option("--ns", o.ns, "Comma-separated n values")->delimiter(',');
  sweep->add_option("--rs", o.rs, "Comma-separated r values")->delimiter(',');
  sweep->add_option("--n-range", o.n_range, "lo:hi:count, evenly spaced and rounded");
  sweep->add_option("--r-range", o.r_range, "lo:hi:count, evenly spaced");
  sweep->add_option("--x0", o.x0, "Initial state for h and mean extinction");
  sweep->add_option("--output,-o", o.output, "Output file (default: standard output)");
  add_policy(sweep, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*analyze) return cmd_analyze(o, out, err);
    if (*simulate) return cmd_simulate(o, out, err);
    if (*predict) return cmd_predict(o, out, err);
    if (*validate) return cmd_validate(o, out, err, vreps_opt->count() > 0);
    if (*sweep) return cmd_sweep(o, out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const RegimeViolation& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NotSupercritical& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const WindowTooSmall& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NullConditioning& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ExcessiveCensoring& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace logext::cli
