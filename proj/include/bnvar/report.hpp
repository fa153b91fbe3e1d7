#pragma once

// Human-readable tables (6 significant digits) and machine-readable JSON
// (full precision) for analysis results. The JSON follows the same
// conventions as the network document: ordered keys, node order as declared.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bnvar/bounds.hpp"
#include "bnvar/mc_variance.hpp"
#include "bnvar/moment_propagation.hpp"
#include "bnvar/network.hpp"
#include "bnvar/topology.hpp"

namespace bnvar::report {

using json = nlohmann::ordered_json;

inline double bound_ratio(double variance, double bound) { return bound > 0.0 ? variance / bound : 0.0; }

inline json to_json(const NodeMoments& m, const std::vector<std::string>& labels) {
  json j = json::object();
  j["name"] = m.node;
  j["alternatives"] = labels;
  const auto t = static_cast<Eigen::Index>(m.size());
  json mean = json::array(), second = json::array(), var = json::array(), sd = json::array(),
       bound = json::array(), ratio = json::array();
  for (Eigen::Index i = 0; i < t; ++i) {
    mean.push_back(m.mean(i));
    json row = json::array();
    for (Eigen::Index k = 0; k < t; ++k) row.push_back(m.second(i, k));
    second.push_back(std::move(row));
    const double v = m.variance(i);
    const double b = variance_upper_bound(std::clamp(m.mean(i), 0.0, 1.0));
    var.push_back(v);
    sd.push_back(std::sqrt(std::max(0.0, v)));
    bound.push_back(b);
    ratio.push_back(bound_ratio(v, b));
  }
  j["mean"] = std::move(mean);
  j["second"] = std::move(second);
  j["variance"] = std::move(var);
  j["std"] = std::move(sd);
  j["bound"] = std::move(bound);
  j["bound_ratio"] = std::move(ratio);
  j["term_products"] = m.term_products;
  return j;
}

/// Inverse of to_json for the moment fields.
inline NodeMoments node_moments_from_json(const json& j) {
  NodeMoments m;
  m.node = j.at("name").get<std::string>();
  const auto& mean = j.at("mean");
  const auto t = static_cast<Eigen::Index>(mean.size());
  m.mean.resize(t);
  m.second.resize(t, t);
  m.variance.resize(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    m.mean(i) = mean.at(static_cast<std::size_t>(i)).get<double>();
    m.variance(i) = j.at("variance").at(static_cast<std::size_t>(i)).get<double>();
    for (Eigen::Index k = 0; k < t; ++k)
      m.second(i, k) = j.at("second").at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k)).get<double>();
  }
  m.term_products = j.at("term_products").get<std::uint64_t>();
  return m;
}

inline json to_json(const NetworkMoments& nm, const Network& net) {
  json nodes = json::array();
  for (const auto& m : nm.nodes) nodes.push_back(to_json(m, net.nodes[net.index_of(m.node)].alternatives));
  return nodes;
}

inline json to_json(const TopologyReport& t) {
  json j = json::object();
  j["class"] = std::string(to_string(t.topology));
  j["suggested_cutset"] = t.suggested_cutset;
  j["root_cutset_available"] = t.root_cutset_available;
  j["max_alternatives"] = t.max_alternatives;
  j["min_parents"] = t.min_parents;
  j["max_parents"] = t.max_parents;
  j["node_count"] = t.node_count;
  j["value_count"] = t.value_count;
  return j;
}

inline json to_json(const SampleSummary& s, const Network& net, bool include_sample = false) {
  json j = json::object();
  const auto& node = net.nodes[net.index_of(s.query.node)];
  j["node"] = s.query.node;
  j["alternative"] = node.alternatives.at(s.query.alternative);
  json ev = json::object();
  for (const auto& n : net.nodes)
    if (auto it = s.query.evidence.find(n.name); it != s.query.evidence.end()) ev[n.name] = n.alternatives.at(it->second);
  j["evidence"] = std::move(ev);
  j["n"] = s.n;
  j["reference_mean"] = s.reference_mean;
  j["sample_mean"] = s.sample_mean;
  j["sq_dev_sum"] = s.sq_dev_sum;
  j["std_estimate"] = s.std_estimate();
  j["min"] = s.min;
  j["max"] = s.max;
  if (include_sample) j["sorted_sample"] = s.sorted_sample;
  return j;
}

inline json to_json(const StdCI& ci) {
  json j = json::object();
  j["level"] = ci.level;
  j["a_n"] = ci.a_n;
  j["b_n"] = ci.b_n;
  j["lower"] = ci.lower;
  j["upper"] = ci.upper;
  j["width"] = ci.width();
  return j;
}

inline json to_json(const ToleranceInterval& t) {
  json j = json::object();
  j["lower"] = t.lower;
  j["upper"] = t.upper;
  j["p"] = t.p;
  j["gamma"] = t.gamma;
  return j;
}

/// Number with 6 significant digits.
inline std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

/// One block per node: alternative, mean, variance, std, bound, ratio.
inline std::string moment_table(const NetworkMoments& nm, const Network& net) {
  std::ostringstream os;
  auto cell = [&](const std::string& s, int w) { os << std::left << std::setw(w) << s; };
  for (const auto& m : nm.nodes) {
    const auto& labels = net.nodes[net.index_of(m.node)].alternatives;
    os << "node " << m.node << "  (term products: " << m.term_products << ")\n";
    cell("  alternative", 16);
    cell("mean", 14);
    cell("variance", 14);
    cell("std", 14);
    cell("bound", 14);
    os << "ratio\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double v = m.variance(ii);
      const double b = variance_upper_bound(std::clamp(m.mean(ii), 0.0, 1.0));
      cell("  " + labels[i], 16);
      cell(num(m.mean(ii)), 14);
      cell(num(v), 14);
      cell(num(std::sqrt(std::max(0.0, v))), 14);
      cell(num(b), 14);
      os << num(bound_ratio(v, b)) << "\n";
    }
  }
  return os.str();
}

}  // namespace bnvar::report
