#include "pbx/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pbx/box.hpp"
#include "pbx/errors.hpp"
#include "pbx/oracle.hpp"
#include "pbx/solver.hpp"

namespace pbx::cli {

namespace {

using json = nlohmann::json;

const std::set<std::string> kCommands = {"solve", "solve-box", "pmf", "cumulants", "verify", "reduce"};

const std::map<std::string, std::vector<std::string>> kPayloadKeys = {
    {"solve", {"n", "g", "r", "c", "basis", "dir", "residual_tol", "dedup_tol", "boundary_tol", "max_order"}},
    {"verify",
     {"n", "g", "r", "c", "basis", "dir", "residual_tol", "dedup_tol", "boundary_tol", "max_order",
      "seed", "n_starts", "tolerance"}},
    {"solve-box",
     {"n", "a", "b", "g", "elem", "s", "dir", "residual_tol", "dedup_tol", "boundary_tol", "max_order"}},
    {"reduce", {"n", "a", "b", "g", "elem", "s"}},
    {"pmf", {"p"}},
    {"cumulants", {"p", "r", "basis"}},
};

struct JobSpec {
  std::string command;
  json payload;
  std::string output = "json";

  json to_json() const { return json{{"command", command}, {"output", output}, {"payload", payload}}; }
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_real(std::string_view text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw InputError("not a number: '" + t + "'");
  }
  if (used != t.size() || !std::isfinite(v)) throw InputError("not a finite number: '" + t + "'");
  return v;
}

long long parse_integer(std::string_view text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw InputError("not an integer: '" + t + "'");
  }
  if (used != t.size()) throw InputError("not an integer: '" + t + "'");
  return v;
}

// Field accessors: values arrive either typed (job files) or as strings (flags).
long long get_int(const json& p, const std::string& key) {
  const json& v = p.at(key);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_string()) return parse_integer(v.get<std::string>());
  throw InputError("field '" + key + "' must be an integer");
}

double get_real(const json& p, const std::string& key) {
  const json& v = p.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_real(v.get<std::string>());
  throw InputError("field '" + key + "' must be a number");
}

std::vector<double> get_list(const json& p, const std::string& key) {
  const json& v = p.at(key);
  if (v.is_string()) return parse_list(v.get<std::string>());
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw InputError("field '" + key + "' must contain numbers only");
      out.push_back(e.get<double>());
    }
    return out;
  }
  throw InputError("field '" + key + "' must be a list of numbers");
}

std::string get_choice(const json& p, const std::string& key, const std::string& fallback,
                       std::initializer_list<const char*> allowed) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_string()) throw InputError("field '" + key + "' must be a string");
  const auto v = p.at(key).get<std::string>();
  for (const char* a : allowed) {
    if (v == a) return v;
  }
  throw InputError("field '" + key + "' has invalid value '" + v + "'");
}

std::vector<double> get_payoff(const json& p, const std::string& key, int n) {
  const json& v = p.at(key);
  if (v.is_string()) return parse_payoff(v.get<std::string>(), n).values();
  auto values = get_list(p, key);
  if (values.size() != static_cast<std::size_t>(n) + 1) {
    throw InputError("payoff must have n+1 = " + std::to_string(n + 1) + " entries, got " +
                     std::to_string(values.size()));
  }
  return values;
}

void require(const json& p, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (!p.contains(k)) throw InputError(std::string("missing field '") + k + "'");
  }
}

int checked_n(const json& p) {
  const long long n = get_int(p, "n");
  if (n < 0 || n > 100000) throw InputError("field 'n' out of range");
  return static_cast<int>(n);
}

void normalise_tolerances(const json& in, json& out) {
  const SolveOptions defaults;
  auto real_or = [&](const char* key, double fallback) {
    const double v = in.contains(key) ? get_real(in, key) : fallback;
    if (!(v > 0.0)) throw InputError(std::string("field '") + key + "' must be positive");
    out[key] = v;
  };
  real_or("residual_tol", defaults.residual_tol);
  real_or("dedup_tol", defaults.dedup_tol);
  real_or("boundary_tol", defaults.boundary_tol);
  const long long cap = in.contains("max_order") ? get_int(in, "max_order") : defaults.max_order;
  if (cap < 0 || cap > 16) throw InputError("field 'max_order' must lie in [0, 16]");
  out["max_order"] = cap;
}

// Validates a payload and rewrites every field into its typed, fully defaulted form.
json normalise_payload(const std::string& command, const json& in) {
  if (!in.is_object()) throw InputError("payload must be an object");
  const auto& allowed = kPayloadKeys.at(command);
  for (const auto& [key, value] : in.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InputError("unknown field '" + key + "' for command '" + command + "'");
    }
  }

  json out = json::object();
  if (command == "solve" || command == "verify") {
    require(in, {"n", "g"});
    const int n = checked_n(in);
    out["n"] = n;
    out["g"] = get_payoff(in, "g", n);
    const auto c = in.contains("c") ? get_list(in, "c") : std::vector<double>{};
    if (in.contains("r") && get_int(in, "r") != static_cast<long long>(c.size())) {
      throw InputError("field 'r' does not match the number of constraint values in 'c'");
    }
    out["r"] = c.size();
    out["c"] = c;
    out["basis"] = get_choice(in, "basis", "cumulant", {"cumulant", "moment"});
    out["dir"] = get_choice(in, "dir", "max", {"max", "min"});
    normalise_tolerances(in, out);
    if (command == "verify") {
      const OracleConfig defaults;
      const json& seed = in.contains("seed") ? in.at("seed") : json(defaults.seed);
      if (seed.is_number_unsigned() || seed.is_number_integer()) {
        out["seed"] = seed.get<std::uint64_t>();
      } else if (seed.is_string()) {
        try {
          out["seed"] = std::stoull(seed.get<std::string>(), nullptr, 0);
        } catch (const std::exception&) {
          throw InputError("field 'seed' must be an unsigned integer");
        }
      } else {
        throw InputError("field 'seed' must be an unsigned integer");
      }
      const long long starts = in.contains("n_starts") ? get_int(in, "n_starts") : defaults.n_starts;
      if (starts < 1) throw InputError("field 'n_starts' must be positive");
      out["n_starts"] = starts;
      const double tol = in.contains("tolerance") ? get_real(in, "tolerance") : 1e-5;
      if (!(tol > 0.0)) throw InputError("field 'tolerance' must be positive");
      out["tolerance"] = tol;
    }
  } else if (command == "solve-box" || command == "reduce") {
    require(in, {"a", "b", "s"});
    out["a"] = get_real(in, "a");
    out["b"] = get_real(in, "b");
    if (!(out["a"].get<double>() <= out["b"].get<double>())) throw InputError("need a <= b");
    if (in.contains("g") == in.contains("elem")) {
      throw InputError("exactly one of 'g' (vertex values) or 'elem' must be given");
    }
    if (in.contains("elem")) {
      const auto elem = get_list(in, "elem");
      if (elem.empty()) throw InputError("field 'elem' must not be empty");
      const int n = static_cast<int>(elem.size()) - 1;
      if (in.contains("n") && checked_n(in) != n) throw InputError("field 'n' does not match 'elem'");
      out["n"] = n;
      out["elem"] = elem;
    } else {
      require(in, {"n"});
      const int n = checked_n(in);
      out["n"] = n;
      out["g"] = get_payoff(in, "g", n);
    }
    out["s"] = get_list(in, "s");
    if (command == "solve-box") {
      out["dir"] = get_choice(in, "dir", "max", {"max", "min"});
      normalise_tolerances(in, out);
    }
  } else if (command == "pmf") {
    require(in, {"p"});
    out["p"] = get_list(in, "p");
  } else if (command == "cumulants") {
    require(in, {"p", "r"});
    out["p"] = get_list(in, "p");
    const long long r = get_int(in, "r");
    if (r < 0 || r > 16) throw InputError("field 'r' must lie in [0, 16]");
    out["r"] = r;
    out["basis"] = get_choice(in, "basis", "cumulant", {"cumulant", "moment"});
  }
  return out;
}

JobSpec job_from_json(const json& j) {
  if (!j.is_object()) throw InputError("job must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "command" && key != "payload" && key != "output") {
      throw InputError("unknown job field '" + key + "'");
    }
  }
  if (!j.contains("command") || !j.at("command").is_string()) {
    throw InputError("job needs a string 'command'");
  }
  JobSpec job;
  job.command = j.at("command").get<std::string>();
  if (!kCommands.contains(job.command)) throw InputError("unknown command '" + job.command + "'");
  job.output = get_choice(j, "output", "json", {"json", "text"});
  job.payload = normalise_payload(job.command, j.contains("payload") ? j.at("payload") : json::object());
  return job;
}

SolveOptions options_from(const json& p) {
  SolveOptions opts;
  opts.residual_tol = p.at("residual_tol").get<double>();
  opts.dedup_tol = p.at("dedup_tol").get<double>();
  opts.boundary_tol = p.at("boundary_tol").get<double>();
  opts.max_order = p.at("max_order").get<int>();
  opts.threads = threads_from_env();
  return opts;
}

Direction direction_from(const json& p) {
  return p.at("dir").get<std::string>() == "min" ? Direction::Min : Direction::Max;
}

json candidate_json(const ExtremalCandidate& cand) {
  json blocks = json::array();
  for (const Block& b : cand.blocks) blocks.push_back({{"n", b.size}, {"q", b.q}});
  return {{"n0", cand.ones}, {"zeros", cand.zeros}, {"blocks", blocks}};
}

json solve_json(const SolveResult& res) {
  json optima = json::array();
  for (std::size_t i = 0; i < res.all_optima.size(); ++i) {
    optima.push_back({{"value", res.all_optima_values[i]}, {"candidate", candidate_json(res.all_optima[i])}});
  }
  return {{"value", res.value},
          {"candidate", candidate_json(res.candidate)},
          {"residuals", res.residuals},
          {"all_optima", optima}};
}

SolveRequest solve_request(const json& p) {
  SolveRequest req;
  req.n = p.at("n").get<int>();
  req.g = Payoff(p.at("g").get<std::vector<double>>());
  req.spec.c = p.at("c").get<std::vector<double>>();
  req.spec.basis = p.at("basis").get<std::string>() == "moment" ? Basis::Moment : Basis::Cumulant;
  req.direction = direction_from(p);
  req.options = options_from(p);
  return req;
}

BoxRequest box_request(const json& p, bool with_solver_fields) {
  BoxRequest req;
  req.a = p.at("a").get<double>();
  req.b = p.at("b").get<double>();
  if (p.contains("elem")) {
    req.f = SymmetricMultiaffine{p.at("elem").get<std::vector<double>>()};
  } else {
    const auto g = p.at("g").get<std::vector<double>>();
    if (req.a < req.b) {
      req.f = SymmetricMultiaffine::from_vertex_values(g, req.a, req.b);
    } else {
      // All vertices coincide on a degenerate box, so the table must be constant.
      for (double v : g) {
        if (v != g.front()) throw InputError("vertex values must agree on a degenerate box");
      }
      std::vector<double> elem(g.size(), 0.0);
      elem[0] = g.front();
      req.f = SymmetricMultiaffine{std::move(elem)};
    }
  }
  req.s_target = p.at("s").get<std::vector<double>>();
  if (with_solver_fields) {
    req.direction = direction_from(p);
    req.options = options_from(p);
  }
  return req;
}

json execute(const JobSpec& job) {
  const json& p = job.payload;
  json report;
  if (job.command == "pmf") {
    const Pmf pmf = bc_pmf(ParamVector(p.at("p").get<std::vector<double>>()));
    report["pmf"] = pmf.weights();
    report["quality_warning"] = pmf.quality_warning();
  } else if (job.command == "cumulants") {
    const auto values = p.at("p").get<std::vector<double>>();
    const ParamVector params(values);
    const int r = p.at("r").get<int>();
    const auto kappa = power_sums_to_cumulants(power_sums(params.span(), r));
    if (p.at("basis").get<std::string>() == "moment") {
      report["moments"] = moments_from_cumulants(kappa);
    } else {
      report["cumulants"] = kappa;
    }
  } else if (job.command == "solve") {
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult res = solve_extremal(solve_request(p));
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    report = solve_json(res);
    report["diagnostics"] = {{"structures_examined", res.structures_examined},
                             {"roots_found", res.roots_found},
                             {"wall_time_ms", ms}};
  } else if (job.command == "verify") {
    const auto t0 = std::chrono::steady_clock::now();
    const SolveRequest req = solve_request(p);
    const SolveResult res = solve_extremal(req);
    OracleConfig cfg;
    cfg.seed = p.at("seed").get<std::uint64_t>();
    cfg.n_starts = p.at("n_starts").get<int>();
    const auto s = req.spec.to_power_sums();
    const OracleResult orc = oracle_optimize(req.n, req.g, s, req.direction, cfg);
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    const double gap = std::abs(res.value - orc.value);
    report = solve_json(res);
    json profile = json::array();
    for (const auto& c : orc.profile) profile.push_back({{"value", c.value}, {"count", c.count}});
    report["oracle"] = {{"value", orc.value},
                        {"p", orc.p.values()},
                        {"interior_profile", profile},
                        {"feasible_starts", orc.feasible_starts}};
    report["gap"] = gap;
    report["agree"] = gap <= p.at("tolerance").get<double>();
    report["structure_bound_holds"] = static_cast<int>(orc.profile.size()) <= req.spec.r();
    report["diagnostics"] = {{"structures_examined", res.structures_examined},
                             {"roots_found", res.roots_found},
                             {"wall_time_ms", ms}};
  } else if (job.command == "solve-box") {
    const auto t0 = std::chrono::steady_clock::now();
    const BoxResult res = solve_box(box_request(p, true));
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    report = solve_json(res.unit);
    report["value"] = res.value;
    report["x"] = res.x;
    report["x_residuals"] = res.x_residuals;
    report["diagnostics"] = {{"structures_examined", res.unit.structures_examined},
                             {"roots_found", res.unit.roots_found},
                             {"wall_time_ms", ms}};
  } else if (job.command == "reduce") {
    const ReducedProblem red = reduce_box(box_request(p, false));
    report["g"] = red.g.values();
    report["s_unit"] = red.s_unit;
    report["cumulants"] = red.cumulants;
  }
  report["inputs"] = job.to_json();
  return report;
}

void write_text(const json& report, std::ostream& out) {
  for (const auto& [key, value] : report.items()) {
    if (key == "inputs") continue;
    out << key << ": " << value.dump() << '\n';
  }
}

json error_json(const std::string& kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::size_t begin = 0;
  while (true) {
    const auto comma = text.find(',', begin);
    out.push_back(parse_real(text.substr(begin, comma == std::string_view::npos ? text.npos : comma - begin)));
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return out;
}

Payoff parse_payoff(std::string_view text, int n) {
  if (n < 0) throw InputError("payoff: negative n");
  const std::string t = trim(text);
  const auto size = static_cast<std::size_t>(n) + 1;
  auto builtin_index = [&](std::string_view prefix) -> long long {
    const long long m = parse_integer(std::string_view(t).substr(prefix.size()));
    if (m < 0 || m > n) throw InputError("payoff: index out of range in '" + t + "'");
    return m;
  };

  std::vector<double> g;
  if (t.starts_with("tail:")) {
    const long long m = builtin_index("tail:");
    g.assign(size, 0.0);
    for (std::size_t x = static_cast<std::size_t>(m); x < size; ++x) g[x] = 1.0;
  } else if (t.starts_with("point:")) {
    const long long m = builtin_index("point:");
    g.assign(size, 0.0);
    g[static_cast<std::size_t>(m)] = 1.0;
  } else if (t == "identity") {
    for (std::size_t x = 0; x < size; ++x) g.push_back(static_cast<double>(x));
  } else if (t.starts_with("@")) {
    std::ifstream file(t.substr(1));
    if (!file) throw InputError("payoff: cannot open '" + t.substr(1) + "'");
    std::stringstream buf;
    buf << file.rdbuf();
    const std::string content = trim(buf.str());
    if (content.starts_with("[")) {
      const json arr = json::parse(content, nullptr, false);
      if (arr.is_discarded() || !arr.is_array()) throw InputError("payoff: malformed JSON array");
      for (const auto& e : arr) {
        if (!e.is_number()) throw InputError("payoff: non-numeric entry");
        g.push_back(e.get<double>());
      }
    } else {
      std::string flat = content;
      std::replace(flat.begin(), flat.end(), '\n', ',');
      g = parse_list(flat);
    }
  } else {
    g = parse_list(t);
  }
  if (g.size() != size) {
    throw InputError("payoff must have n+1 = " + std::to_string(size) + " entries, got " +
                     std::to_string(g.size()));
  }
  return Payoff(std::move(g));
}

int threads_from_env() {
  const char* env = std::getenv("PB_EXTREMAL_THREADS");
  if (env == nullptr) return 0;
  try {
    const long long v = parse_integer(env);
    return v > 0 && v <= 1024 ? static_cast<int>(v) : 0;
  } catch (const InputError&) {
    return 0;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Extremal expectations of Bernoulli convolutions with prescribed cumulants", "pb-extremal"};
  std::string job_file;
  std::string output = "json";
  app.add_option("--job", job_file, "JSON job specification (command, payload, output)");
  app.add_option("--output", output, "Report format")->check(CLI::IsMember({"json", "text"}));
  app.require_subcommand(0, 1);
  app.fallthrough();

  // Every flag is collected as text and typed during payload normalisation,
  // so flags and job files share one validation path.
  std::map<std::string, std::map<std::string, std::string>> flags;
  auto add = [&](CLI::App* sub, const std::string& name, const std::string& help) {
    sub->add_option("--" + name, flags[sub->get_name()][name], help);
  };
  auto add_solver_flags = [&](CLI::App* sub) {
    add(sub, "n", "number of Bernoulli factors");
    add(sub, "g", "payoff: comma list of n+1 values, tail:m, point:m, identity or @file");
    add(sub, "r", "number of prescribed cumulants (must match --c)");
    add(sub, "c", "comma-separated prescribed values");
    add(sub, "basis", "cumulant (default) or moment");
    add(sub, "dir", "max (default) or min");
    add(sub, "residual_tol", "constraint residual tolerance");
    add(sub, "dedup_tol", "root deduplication tolerance");
    add(sub, "boundary_tol", "distance from {0,1} below which a value is not interior");
    add(sub, "max_order", "cap on the number of constraints");
  };
  auto add_box_flags = [&](CLI::App* sub, bool solver) {
    add(sub, "n", "dimension (implied by --elem)");
    add(sub, "a", "lower box endpoint");
    add(sub, "b", "upper box endpoint");
    add(sub, "g", "f at vertices: entry m is f with m coordinates at b");
    add(sub, "elem", "coefficients of f in the elementary symmetric functions of x");
    add(sub, "s", "targets for the power sums S_1(x), ..., S_r(x)");
    if (solver) {
      add(sub, "dir", "max (default) or min");
      add(sub, "residual_tol", "constraint residual tolerance");
      add(sub, "dedup_tol", "root deduplication tolerance");
      add(sub, "boundary_tol", "distance from {0,1} below which a value is not interior");
      add(sub, "max_order", "cap on the number of constraints");
    }
  };

  add_solver_flags(app.add_subcommand("solve", "extremal expectation under cumulant constraints"));
  auto* verify = app.add_subcommand("verify", "solve and cross-check against the brute-force oracle");
  add_solver_flags(verify);
  add(verify, "seed", "oracle random seed");
  add(verify, "n_starts", "oracle random starts");
  add(verify, "tolerance", "maximal accepted solver/oracle gap");
  add_box_flags(app.add_subcommand("solve-box", "symmetric multiaffine optimisation on [a,b]^n"), true);
  add_box_flags(app.add_subcommand("reduce", "report the equivalent problem on [0,1]^n"), false);
  add(app.add_subcommand("pmf", "Bernoulli convolution pmf"), "p", "comma-separated success probabilities");
  auto* cumulants = app.add_subcommand("cumulants", "first r cumulants (or moments) of BC_p");
  add(cumulants, "p", "comma-separated success probabilities");
  add(cumulants, "r", "number of cumulants");
  add(cumulants, "basis", "cumulant (default) or moment");

  std::string format = "json";
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    format = output;

    JobSpec job;
    if (!job_file.empty()) {
      if (!app.get_subcommands().empty()) throw InputError("--job cannot be combined with a subcommand");
      std::ifstream file(job_file);
      if (!file) throw InputError("cannot open job file '" + job_file + "'");
      const json j = json::parse(file, nullptr, false);
      if (j.is_discarded()) throw InputError("job file is not valid JSON");
      job = job_from_json(j);
      if (app.count("--output") > 0) job.output = output;
    } else {
      if (app.get_subcommands().empty()) throw InputError("expected a subcommand or --job");
      const std::string name = app.get_subcommands().front()->get_name();
      json payload = json::object();
      for (const auto& [key, value] : flags[name]) {
        if (app.get_subcommands().front()->count("--" + key) > 0) payload[key] = value;
      }
      job = job_from_json({{"command", name}, {"output", output}, {"payload", payload}});
    }
    format = job.output;

    const json report = execute(job);
    if (format == "text") {
      write_text(report, out);
    } else {
      out << report.dump(2) << '\n';
    }
    if (job.command == "verify" && !report.at("agree").get<bool>()) {
      err << "verify: solver and oracle disagree (gap " << report.at("gap").get<double>() << ")\n";
      return kMismatch;
    }
    return kOk;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    out << error_json("input", e.what()).dump(2) << '\n';
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InfeasibleError& e) {
    json body = error_json("infeasible", e.what());
    body["error"]["reason"] = to_string(e.reason());
    body["error"]["structures_examined"] = e.structures_examined();
    out << body.dump(2) << '\n';
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const InputError& e) {
    out << error_json("input", e.what()).dump(2) << '\n';
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    out << error_json("input", e.what()).dump(2) << '\n';
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const json::exception& e) {
    out << error_json("input", e.what()).dump(2) << '\n';
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace pbx::cli
