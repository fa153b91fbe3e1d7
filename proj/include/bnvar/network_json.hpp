#pragma once

// JSON network and evidence documents.
//
//   {"name": "...", "nodes": [{"name": "...", "alternatives": [...],
//     "parents": [...], "cpd": [dist, ...]}]}
//
// where dist is {"dirichlet": [int...]} | {"point": [number...]} |
// {"finite": [{"probs": [number...], "weight": number}, ...]}, and cpd rows
// are row-major over the parents' alternative indices.
//
//   {"evidence": {"node": "alternativeLabel", ...}}

#include <string>
#include <string_view>

#include <json.hpp>

#include "bnvar/error.hpp"
#include "bnvar/network.hpp"

namespace bnvar {

namespace detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::syntax, std::string(what) + " syntax error at byte " + std::to_string(e.byte) +
                                ": " + e.what());
  }
}

inline const json& member(const json& obj, const char* key, std::string_view context) {
  auto it = obj.find(key);
  if (it == obj.end())
    fail(ErrorCode::schema, std::string(context) + ": missing field '" + key + "'");
  return *it;
}

inline std::vector<std::string> string_list(const json& j, std::string_view context) {
  if (!j.is_array()) fail(ErrorCode::schema, std::string(context) + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& s : j) {
    if (!s.is_string()) fail(ErrorCode::schema, std::string(context) + ": expected a string");
    out.push_back(s.get<std::string>());
  }
  return out;
}

inline std::vector<double> number_list(const json& j, std::string_view context) {
  if (!j.is_array()) fail(ErrorCode::schema, std::string(context) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) fail(ErrorCode::schema, std::string(context) + ": expected a number");
    out.push_back(x.get<double>());
  }
  return out;
}

inline DistributionSpec parse_dist(const json& j, const std::string& context) {
  if (!j.is_object() || j.size() != 1)
    fail(ErrorCode::schema, context + ": distribution must be an object with exactly one of "
                                      "'dirichlet', 'point', 'finite'");
  if (auto it = j.find("dirichlet"); it != j.end()) {
    if (!it->is_array()) fail(ErrorCode::schema, context + ": dirichlet counts must be an array");
    Dirichlet d;
    for (const auto& c : *it) {
      if (!c.is_number_integer())
        fail(ErrorCode::schema, context + ": dirichlet counts must be integers");
      d.counts.push_back(c.get<std::int64_t>());
    }
    return d;
  }
  if (auto it = j.find("point"); it != j.end()) return Point{number_list(*it, context)};
  if (auto it = j.find("finite"); it != j.end()) {
    if (!it->is_array()) fail(ErrorCode::schema, context + ": finite atoms must be an array");
    Finite f;
    for (const auto& a : *it) {
      if (!a.is_object()) fail(ErrorCode::schema, context + ": atom must be an object");
      const auto& w = member(a, "weight", context);
      if (!w.is_number()) fail(ErrorCode::schema, context + ": atom weight must be a number");
      f.atoms.push_back({number_list(member(a, "probs", context), context), w.get<double>()});
    }
    return f;
  }
  fail(ErrorCode::schema, context + ": unknown distribution kind");
}

inline ordered_json dist_to_json(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        ordered_json j = ordered_json::object();
        if constexpr (std::is_same_v<S, Dirichlet>) {
          j["dirichlet"] = s.counts;
        } else if constexpr (std::is_same_v<S, Point>) {
          j["point"] = s.probs;
        } else {
          ordered_json atoms = ordered_json::array();
          for (const auto& a : s.atoms) {
            ordered_json atom = ordered_json::object();
            atom["probs"] = a.probs;
            atom["weight"] = a.weight;
            atoms.push_back(std::move(atom));
          }
          j["finite"] = std::move(atoms);
        }
        return j;
      },
      spec);
}

}  // namespace detail

/// Reads the document structure without checking the network model, so
/// validate_network can report every violation at once.
inline Network parse_network_document(std::string_view text) {
  using detail::member;
  const auto doc = detail::parse_json(text, "network");
  if (!doc.is_object()) fail(ErrorCode::schema, "network document must be an object");

  Network net;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) fail(ErrorCode::schema, "network 'name' must be a string");
    net.name = it->get<std::string>();
  }
  const auto& nodes = member(doc, "nodes", "network");
  if (!nodes.is_array()) fail(ErrorCode::schema, "network 'nodes' must be an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& jn = nodes[i];
    std::string context = "nodes[" + std::to_string(i) + "]";
    if (!jn.is_object()) fail(ErrorCode::schema, context + " must be an object");
    NodeSpec node;
    const auto& name = member(jn, "name", context);
    if (!name.is_string()) fail(ErrorCode::schema, context + ": 'name' must be a string");
    node.name = name.get<std::string>();
    context = "node '" + node.name + "'";
    node.alternatives = detail::string_list(member(jn, "alternatives", context), context);
    if (auto it = jn.find("parents"); it != jn.end())
      node.parents = detail::string_list(*it, context);
    const auto& cpd = member(jn, "cpd", context);
    if (!cpd.is_array()) fail(ErrorCode::schema, context + ": 'cpd' must be an array");
    for (std::size_t r = 0; r < cpd.size(); ++r)
      node.cpd.push_back(detail::parse_dist(cpd[r], context + " row " + std::to_string(r)));
    net.nodes.push_back(std::move(node));
  }
  return net;
}

/// Parses and validates a network document. Node, alternative, parent, and
/// row order follow the document. Vectors within the simplex tolerance are
/// renormalized; anything further off is rejected.
inline Network parse_network(std::string_view text) {
  auto net = parse_network_document(text);
  require_valid(net);
  renormalize(net);
  return net;
}

inline std::string serialize_network(const Network& net, int indent = 2) {
  detail::ordered_json doc = detail::ordered_json::object();
  doc["name"] = net.name;
  auto nodes = detail::ordered_json::array();
  for (const auto& node : net.nodes) {
    detail::ordered_json jn = detail::ordered_json::object();
    jn["name"] = node.name;
    jn["alternatives"] = node.alternatives;
    jn["parents"] = node.parents;
    auto cpd = detail::ordered_json::array();
    for (const auto& spec : node.cpd) cpd.push_back(detail::dist_to_json(spec));
    jn["cpd"] = std::move(cpd);
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(indent);
}

/// Parses {"evidence": {"node": "label", ...}} against `net`.
inline Evidence parse_evidence(std::string_view text, const Network& net) {
  const auto doc = detail::parse_json(text, "evidence");
  if (!doc.is_object()) fail(ErrorCode::schema, "evidence document must be an object");
  const auto& obj = detail::member(doc, "evidence", "evidence document");
  if (!obj.is_object()) fail(ErrorCode::schema, "'evidence' must be an object");
  Evidence ev;
  for (const auto& [name, label] : obj.items()) {
    auto i = net.find(name);
    if (!i) fail(ErrorCode::schema, "evidence names unknown node '" + name + "'");
    if (!label.is_string()) fail(ErrorCode::schema, "evidence for '" + name + "' must be a label");
    auto idx = net.nodes[*i].alternative_index(label.get<std::string>());
    if (!idx)
      fail(ErrorCode::schema, "node '" + name + "' has no alternative '" + label.get<std::string>() + "'");
    ev.emplace(name, *idx);
  }
  return ev;
}

inline std::string serialize_evidence(const Evidence& ev, const Network& net, int indent = 2) {
  detail::ordered_json obj = detail::ordered_json::object();
  for (const auto& node : net.nodes)
    if (auto it = ev.find(node.name); it != ev.end()) obj[node.name] = node.alternatives.at(it->second);
  detail::ordered_json doc = detail::ordered_json::object();
  doc["evidence"] = std::move(obj);
  return doc.dump(indent);
}

}  // namespace bnvar
