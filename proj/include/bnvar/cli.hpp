#pragma once

// Command-line front end. run_cli parses arguments, runs one analysis, and
// writes the report to `out`; errors go to `err` as a single line
// "error <CODE>: <message>". Returns the process exit status.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bnvar/bounds.hpp"
#include "bnvar/error.hpp"
#include "bnvar/mc_variance.hpp"
#include "bnvar/moment_propagation.hpp"
#include "bnvar/network.hpp"
#include "bnvar/network_json.hpp"
#include "bnvar/oracle.hpp"
#include "bnvar/report.hpp"
#include "bnvar/topology.hpp"

namespace bnvar::cli {

using json = nlohmann::ordered_json;

/// Environment variable holding the default Monte Carlo seed.
inline constexpr const char* kSeedEnv = "BNVAR_SEED";
inline constexpr std::uint64_t kDefaultSeed = 0;
inline constexpr std::uint64_t kDefaultCheckTrials = 200;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// "NODE=ALT" split at the first '='.
inline std::pair<std::string, std::string> split_query(const std::string& q) {
  const auto eq = q.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == q.size())
    fail(ErrorCode::usage, "query must look like NODE=ALTERNATIVE, got '" + q + "'");
  return {q.substr(0, eq), q.substr(eq + 1)};
}

inline Query resolve_query(const Network& net, const std::string& q, Evidence ev) {
  const auto [node, alt] = split_query(q);
  const auto v = net.find(node);
  if (!v) fail(ErrorCode::usage, "query names unknown node '" + node + "'");
  const auto a = net.nodes[*v].alternative_index(alt);
  if (!a) fail(ErrorCode::usage, "node '" + node + "' has no alternative '" + alt + "'");
  return {node, *a, std::move(ev)};
}

inline std::uint64_t seed_from_env() {
  const char* s = std::getenv(kSeedEnv);
  if (!s || !*s) return kDefaultSeed;
  char* end = nullptr;
  errno = 0;
  const auto v = std::strtoull(s, &end, 10);
  if (errno || *end || *s == '-') fail(ErrorCode::usage, std::string(kSeedEnv) + " must be a non-negative integer");
  return v;
}

inline json evidence_json(const Evidence& ev, const Network& net) {
  json j = json::object();
  for (const auto& n : net.nodes)
    if (auto it = ev.find(n.name); it != ev.end()) j[n.name] = n.alternatives.at(it->second);
  return j;
}

inline std::string evidence_text(const Evidence& ev, const Network& net) {
  std::string s;
  for (const auto& n : net.nodes)
    if (auto it = ev.find(n.name); it != ev.end()) {
      if (!s.empty()) s += ", ";
      s += n.name + "=" + n.alternatives.at(it->second);
    }
  return s.empty() ? "(none)" : s;
}

inline json moments_result(const NetworkMoments& nm, const Network& net) {
  json j = json::object();
  j["network"] = net.name;
  j["nodes"] = report::to_json(nm, net);
  j["term_products"] = nm.term_products();
  return j;
}

struct Options {
  bool json_output = false;
  std::string network_file;
  std::string evidence_file;
  std::vector<std::string> cutset;
  std::string query;
  std::optional<std::uint64_t> n;
  std::optional<double> epsilon;
  bool relative = false;
  std::optional<std::uint64_t> seed;
  double p = 0.9;
  std::optional<double> gamma;
  std::optional<std::uint64_t> i, j;
  std::optional<double> expected;
  std::optional<std::uint64_t> check;
  unsigned threads = 0;
  bool sample = false;
};

class Runner {
 public:
  Runner(const Options& o, std::ostream& out) : o_(o), out_(out) {}

  int emit(const std::vector<std::string>& echo, const json& result, const std::string& human) {
    if (o_.json_output) {
      json doc = json::object();
      doc["command"] = echo;
      doc["result"] = result;
      out_ << doc.dump(2) << "\n";
    } else {
      out_ << human;
    }
    return 0;
  }

  Network load() const { return parse_network(read_file(o_.network_file)); }

  Evidence load_evidence(const Network& net) const {
    if (o_.evidence_file.empty()) return {};
    return parse_evidence(read_file(o_.evidence_file), net);
  }

  std::pair<json, std::string> validate(int& status) const {
    const auto net = parse_network_document(read_file(o_.network_file));
    const auto report = validate_network(net);
    json violations = json::array();
    std::ostringstream h;
    for (const auto& v : report) {
      json jv = json::object();
      jv["node"] = v.node;
      jv["row"] = v.row ? json(*v.row) : json(nullptr);
      jv["rule"] = v.rule;
      jv["message"] = v.message;
      violations.push_back(std::move(jv));
      h << "node " << v.node;
      if (v.row) h << " row " << *v.row;
      h << ": " << v.rule << ": " << v.message << "\n";
    }
    if (report.empty()) h << "network '" << net.name << "' is valid (" << net.nodes.size() << " nodes)\n";
    json j = json::object();
    j["network"] = net.name;
    j["valid"] = report.empty();
    j["violations"] = std::move(violations);
    status = report.empty() ? 0 : exit_status(ErrorCode::schema);
    return {j, h.str()};
  }

  std::pair<json, std::string> topology() const {
    const auto net = load();
    const auto t = classify_topology(net);
    std::ostringstream h;
    h << "class: " << to_string(t.topology) << "\n";
    if (t.topology == TopologyClass::multiply_connected) {
      h << "suggested root cutset: ";
      if (t.suggested_cutset.empty()) h << "(none of size <= " << kMaxCutsetSize << ")";
      for (std::size_t k = 0; k < t.suggested_cutset.size(); ++k) h << (k ? "," : "") << t.suggested_cutset[k];
      h << "\n";
    }
    h << "nodes (n): " << t.node_count << "\nvalues (v): " << t.value_count
      << "\nmax alternatives (T): " << t.max_alternatives << "\nparents (m..M): " << t.min_parents << ".."
      << t.max_parents << "\n";
    return {report::to_json(t), h.str()};
  }

  std::pair<json, std::string> prior_var() const {
    const auto net = load();
    const auto nm = propagate_prior_moments(net);
    return {moments_result(nm, net), report::moment_table(nm, net)};
  }

  std::pair<json, std::string> evidence_var() const {
    const auto net = load();
    const auto ev = load_evidence(net);
    const auto nm = downstream_evidence_moments(net, ev);
    auto j = moments_result(nm, net);
    j["evidence"] = evidence_json(ev, net);
    return {j, "evidence: " + evidence_text(ev, net) + "\n" + report::moment_table(nm, net)};
  }

  std::pair<json, std::string> cond_var() const {
    const auto net = load();
    auto cutset = o_.cutset;
    if (cutset.empty()) {
      const auto t = classify_topology(net);
      if (t.topology == TopologyClass::multiply_connected && t.suggested_cutset.empty())
        fail(ErrorCode::unsupported, "no root cutset of size <= " + std::to_string(kMaxCutsetSize) +
                                         " breaks every loop of network '" + net.name + "'");
      cutset = t.suggested_cutset;
    }
    const auto nm = conditioned_prior_moments(net, cutset);
    auto j = moments_result(nm, net);
    j["cutset"] = cutset;
    std::string names;
    for (const auto& c : cutset) names += (names.empty() ? "" : ",") + c;
    return {j, "cutset: " + (names.empty() ? std::string("(empty)") : names) + "\n" + report::moment_table(nm, net)};
  }

  std::pair<json, std::string> mc() const {
    if (o_.n.has_value() == o_.epsilon.has_value()) fail(ErrorCode::usage, "mc needs exactly one of --n and --epsilon");
    if (o_.n && *o_.n == 0) fail(ErrorCode::usage, "trial count must be at least 1");
    if (o_.epsilon && !(*o_.epsilon > 0.0)) fail(ErrorCode::usage, "epsilon must be positive");
    if (o_.relative && !o_.epsilon) fail(ErrorCode::usage, "--relative applies to --epsilon");
    if (!(o_.p > 0.0 && o_.p < 1.0)) fail(ErrorCode::usage, "p must lie in (0, 1)");
    split_query(o_.query);
    const std::uint64_t seed = o_.seed ? *o_.seed : seed_from_env();

    const auto net = load();
    const auto query = resolve_query(net, o_.query, load_evidence(net));
    const auto target = net.index_of(query.node);
    const double expected = exact_marginal(instantiate_expected(net), query.evidence, target)[query.alternative];

    std::ostringstream h;
    json j = json::object();
    std::uint64_t n = o_.n.value_or(0);
    if (o_.epsilon) {
      n = o_.relative ? plan_n_relative(expected, *o_.epsilon) : plan_n_absolute(expected, *o_.epsilon);
      json plan = json::object();
      plan["expected"] = expected;
      plan["epsilon"] = *o_.epsilon;
      plan["relative"] = o_.relative;
      plan["n"] = n;
      j["plan"] = std::move(plan);
      h << "planned trials: " << n << " (E = " << report::num(expected) << ", "
        << (o_.relative ? "relative" : "absolute") << " width < " << report::num(*o_.epsilon) << ")\n";
    }
    const auto s = run_trials(net, query, n, seed, o_.threads);
    j["seed"] = seed;
    j["summary"] = report::to_json(s, net, o_.sample);
    h << "query: P(" << query.node << "=" << net.nodes[target].alternatives[query.alternative]
      << " | " << evidence_text(query.evidence, net) << ")\n"
      << "trials: " << s.n << "  seed: " << seed << "\n"
      << "reference mean E: " << report::num(s.reference_mean) << "\n"
      << "sample mean: " << report::num(s.sample_mean) << "\n"
      << "std estimate sqrt(S/n): " << report::num(s.std_estimate()) << "\n"
      << "min / max: " << report::num(s.min) << " / " << report::num(s.max) << "\n";
    if (s.n >= kMinCiTrials) {
      const auto ci = std_confidence_interval(s);
      j["ci"] = report::to_json(ci);
      h << "95% CI for std: [" << report::num(ci.lower) << ", " << report::num(ci.upper) << "]  width "
        << report::num(ci.width()) << "\n";
    } else {
      j["ci"] = nullptr;
      h << "95% CI for std: needs more than 100 trials\n";
    }
    if (s.n >= 2) {
      const auto t = minmax_tolerance_interval(s, o_.p);
      j["tolerance"] = report::to_json(t);
      h << "tolerance interval [min, max] covers " << report::num(o_.p) << " with confidence "
        << report::num(t.gamma) << "\n";
    } else {
      j["tolerance"] = nullptr;
    }
    json b = json::object();
    b["variance"] = variance_upper_bound(std::clamp(s.reference_mean, 0.0, 1.0));
    b["relative_std"] = s.reference_mean > 0.0 ? json(relative_std_bound(std::min(s.reference_mean, 1.0))) : json(nullptr);
    j["bound"] = std::move(b);
    h << "variance bound E - E^2: " << report::num(variance_upper_bound(std::clamp(s.reference_mean, 0.0, 1.0)))
      << "\n";
    return {j, h.str()};
  }

  std::pair<json, std::string> plan_n() const {
    if (!o_.expected || !o_.epsilon) fail(ErrorCode::usage, "plan-n needs --expected and --epsilon");
    const double e = *o_.expected, eps = *o_.epsilon;
    const auto n = o_.relative ? plan_n_relative(e, eps) : plan_n_absolute(e, eps);
    auto width = [&](std::uint64_t k) {
      return o_.relative ? ci_width_bound_relative(k, e) : ci_width_bound_absolute(k, e);
    };
    const std::uint64_t check = o_.check.value_or(kDefaultCheckTrials);
    if (check < kMinCiTrials) fail(ErrorCode::usage, "--check needs more than 100 trials");
    json j = json::object();
    j["expected"] = e;
    j["epsilon"] = eps;
    j["relative"] = o_.relative;
    j["n"] = n;
    j["width_bound"] = width(n);
    json c = json::object();
    c["n"] = check;
    c["width_bound"] = width(check);
    c["sufficient"] = width(check) < eps;
    j["check"] = std::move(c);
    std::ostringstream h;
    h << n << "\n"
      << "width bound at n = " << n << ": " << report::num(width(n)) << " < " << report::num(eps) << "\n"
      << "n = " << check << (width(check) < eps ? " sufficient" : " not sufficient") << " (width bound "
      << report::num(width(check)) << ")\n";
    return {j, h.str()};
  }

  std::pair<json, std::string> tolerance() const {
    json j = json::object();
    std::ostringstream h;
    if (o_.gamma) {
      if (o_.n || o_.i || o_.j) fail(ErrorCode::usage, "--gamma plans n; do not combine it with --n, --i, --j");
      const auto n = plan_tolerance_n(o_.p, *o_.gamma);
      j["p"] = o_.p;
      j["gamma_target"] = *o_.gamma;
      j["n"] = n;
      j["gamma"] = minmax_tolerance_gamma(n, o_.p);
      h << n << "\nconfidence at n = " << n << ": " << report::num(minmax_tolerance_gamma(n, o_.p)) << "\n";
      return {j, h.str()};
    }
    if (!o_.n) fail(ErrorCode::usage, "tolerance needs --gamma or --n");
    if (o_.i.has_value() != o_.j.has_value()) fail(ErrorCode::usage, "--i and --j go together");
    const std::uint64_t n = *o_.n;
    const std::uint64_t i = o_.i.value_or(1), jj = o_.j.value_or(n);
    const double g = o_.i ? order_stat_tolerance_gamma(n, i, jj, o_.p) : minmax_tolerance_gamma(n, o_.p);
    j["n"] = n;
    j["i"] = i;
    j["j"] = jj;
    j["p"] = o_.p;
    j["gamma"] = g;
    h << "confidence that [x(" << i << "), x(" << jj << ")] of " << n << " draws covers " << report::num(o_.p)
      << ": " << report::num(g) << "\n";
    return {j, h.str()};
  }

  std::pair<json, std::string> bound() const {
    if (!o_.expected) fail(ErrorCode::usage, "bound needs --expected");
    const double e = *o_.expected;
    const double v = variance_upper_bound(e);
    json j = json::object();
    j["expected"] = e;
    j["variance"] = v;
    j["std"] = std::sqrt(v);
    j["relative_std"] = e > 0.0 ? json(relative_std_bound(e)) : json(nullptr);
    std::ostringstream h;
    h << "variance <= " << report::num(v) << "\nstd <= " << report::num(std::sqrt(v)) << "\n";
    if (e > 0.0) h << "std / E <= " << report::num(relative_std_bound(e)) << "\n";
    return {j, h.str()};
  }

  std::pair<json, std::string> oracle() const {
    const auto net = load();
    const auto ev = load_evidence(net);
    const auto nm = enumerate_exact_moments(net, ev);
    auto j = moments_result(nm, net);
    j["evidence"] = evidence_json(ev, net);
    j["combinations"] = atom_combination_count(net);
    std::string h = "combinations: " + std::to_string(atom_combination_count(net)) + "\nevidence: " +
                    evidence_text(ev, net) + "\n" + report::moment_table(nm, net);
    if (!o_.query.empty()) {
      const auto q = resolve_query(net, o_.query, ev);
      json dist = json::array();
      h += "distribution of P(" + o_.query + "):\n";
      for (const auto& [x, w] : enumerate_value_distribution(net, ev, q.node, q.alternative)) {
        json e = json::object();
        e["value"] = x;
        e["weight"] = w;
        dist.push_back(std::move(e));
        h += "  " + report::num(x) + "  weight " + report::num(w) + "\n";
      }
      j["distribution"] = std::move(dist);
    }
    return {j, h};
  }

 private:
  const Options& o_;
  std::ostream& out_;
};

inline int report_error(std::ostream& err, ErrorCode code, const std::string& msg) {
  err << "error " << to_string(code) << ": " << msg << "\n";
  return exit_status(code);
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  detail::Options o;
  CLI::App app{"Variance analysis for Bayesian networks with uncertain probabilities", "bnvar"};
  app.require_subcommand(1);
  app.add_flag("--json", o.json_output, "Machine-readable JSON report");

  auto add_network = [&](CLI::App* sub) { sub->add_option("network", o.network_file, "Network JSON file")->required(); };
  auto add_evidence = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--evidence", o.evidence_file, "Evidence JSON file");
    if (required) opt->required();
  };
  auto json_flag = [&](CLI::App* sub) { sub->add_flag("--json", o.json_output, "Machine-readable JSON report"); };

  auto* validate = app.add_subcommand("validate", "Check a network and list every violation");
  add_network(validate);
  auto* topology = app.add_subcommand("topology", "Classify the network and suggest a root cutset");
  add_network(topology);
  auto* prior = app.add_subcommand("prior-var", "Exact prior moments of a singly connected network");
  add_network(prior);
  auto* evidence = app.add_subcommand("evidence-var", "Exact moments under evidence on ancestor-closed nodes");
  add_network(evidence);
  add_evidence(evidence, true);
  auto* cond = app.add_subcommand("cond-var", "Exact prior moments by conditioning on root nodes");
  add_network(cond);
  cond->add_option("--cutset", o.cutset, "Comma-separated root nodes (default: suggested cutset)")->delimiter(',');
  auto* mc = app.add_subcommand("mc", "Monte Carlo estimate of the std of one inferred probability");
  add_network(mc);
  add_evidence(mc, false);
  mc->add_option("--query", o.query, "NODE=ALTERNATIVE")->required();
  mc->add_option("--n", o.n, "Number of trials");
  mc->add_option("--epsilon", o.epsilon, "Target CI width; plans the number of trials");
  mc->add_flag("--relative", o.relative, "Epsilon is relative to the expected value");
  mc->add_option("--seed", o.seed, std::string("Master seed (default: $") + kSeedEnv + " or 0)");
  mc->add_option("--p", o.p, "Coverage fraction for the tolerance interval")->capture_default_str();
  mc->add_option("--threads", o.threads, "Worker threads (0: hardware concurrency)");
  mc->add_flag("--sample", o.sample, "Include the sorted sample in the JSON report");
  auto* plan = app.add_subcommand("plan-n", "Number of trials for a target CI width");
  plan->add_option("--expected", o.expected, "Expected value E")->required();
  plan->add_option("--epsilon", o.epsilon, "Target width")->required();
  plan->add_flag("--relative", o.relative, "Width relative to E");
  plan->add_option("--check", o.check, "Also evaluate this trial count (default 200)");
  auto* tol = app.add_subcommand("tolerance", "Tolerance interval sample size or confidence");
  tol->add_option("--p", o.p, "Coverage fraction")->capture_default_str();
  tol->add_option("--gamma", o.gamma, "Target confidence; plans n for [min, max]");
  tol->add_option("--n", o.n, "Sample size");
  tol->add_option("--i", o.i, "Lower order statistic (1-based)");
  tol->add_option("--j", o.j, "Upper order statistic (1-based)");
  auto* bound = app.add_subcommand("bound", "Closed-form variance bounds from the expected value");
  bound->add_option("--expected", o.expected, "Expected value E")->required();
  auto* oracle = app.add_subcommand("oracle", "Brute-force moments over every atom combination");
  add_network(oracle);
  add_evidence(oracle, false);
  oracle->add_option("--query", o.query, "NODE=ALTERNATIVE: also list the value distribution");
  for (auto* sub : {validate, topology, prior, evidence, cond, mc, plan, tol, bound, oracle}) json_flag(sub);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return detail::report_error(err, ErrorCode::usage, msg);
  }

  detail::Runner run(o, out);
  try {
    std::pair<json, std::string> r;
    int status = 0;
    if (validate->parsed()) r = run.validate(status);
    else if (topology->parsed()) r = run.topology();
    else if (prior->parsed()) r = run.prior_var();
    else if (evidence->parsed()) r = run.evidence_var();
    else if (cond->parsed()) r = run.cond_var();
    else if (mc->parsed()) r = run.mc();
    else if (plan->parsed()) r = run.plan_n();
    else if (tol->parsed()) r = run.tolerance();
    else if (bound->parsed()) r = run.bound();
    else r = run.oracle();
    run.emit(args, r.first, r.second);
    if (status) err << "error " << to_string(ErrorCode::schema) << ": network has " << r.first["violations"].size()
                    << " violation(s)\n";
    return status;
  } catch (const Error& e) {
    return detail::report_error(err, e.code(), e.what());
  } catch (const std::exception& e) {
    return detail::report_error(err, ErrorCode::usage, e.what());
  }
}

}  // namespace bnvar::cli
