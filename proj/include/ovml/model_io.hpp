#pragma once

// Structured model interchange. Canonical form: arrays sorted ascending,
// worlds renumbered 0..n-1 on load.

#include <string>
#include <vector>

#include <json.hpp>

#include "ovml/semantics.hpp"

namespace ovml {

using Json = nlohmann::json;

inline Json model_to_json(const FOKripkeModel& m) {
  Json j;
  std::vector<int> worlds;
  for (int w = 0; w < m.num_worlds(); ++w) worlds.push_back(w);
  j["worlds"] = worlds;
  Json rels = Json::object();
  for (const auto& [id, rows] : m.frame.rel) {
    std::vector<std::vector<int>> pairs;
    for (int w = 0; w < m.num_worlds(); ++w)
      for (int v = 0; v < m.num_worlds(); ++v)
        if ((rows[static_cast<size_t>(w)] >> v) & 1) pairs.push_back({w, v});
    rels[id] = pairs;
  }
  j["relations"] = rels;
  Json doms = Json::object();
  for (int w = 0; w < m.num_worlds(); ++w) {
    std::vector<int> es;
    for (int e = 0; e < kMaxElems; ++e)
      if ((m.domains[static_cast<size_t>(w)] >> e) & 1) es.push_back(e);
    doms[std::to_string(w)] = es;
  }
  j["domains"] = doms;
  Json preds = Json::object();
  for (const auto& [p, rows] : m.preds) {
    Json per = Json::object();
    for (int w = 0; w < m.num_worlds(); ++w) {
      std::vector<int> es;
      for (int e = 0; e < kMaxElems; ++e)
        if ((rows[static_cast<size_t>(w)] >> e) & 1) es.push_back(e);
      per[std::to_string(w)] = es;
    }
    preds[p] = per;
  }
  j["preds"] = preds;
  Json consts = Json::object();
  for (const auto& [c, vals] : m.consts) {
    Json per = Json::object();
    for (int w = 0; w < m.num_worlds(); ++w) per[std::to_string(w)] = vals[static_cast<size_t>(w)];
    consts[c] = per;
  }
  j["consts"] = consts;
  j["mode"] = to_string(m.mode);
  if (m.frontier) {
    std::vector<int> fr;
    for (int w = 0; w < m.num_worlds(); ++w)
      if ((m.frontier >> w) & 1) fr.push_back(w);
    j["frontier"] = fr;
  }
  return j;
}

inline FOKripkeModel model_from_json(const Json& j) {
  FOKripkeModel m;
  std::vector<int> worlds = j.at("worlds").get<std::vector<int>>();
  std::map<int, int> remap;
  for (size_t i = 0; i < worlds.size(); ++i) remap[worlds[i]] = static_cast<int>(i);
  int n = static_cast<int>(worlds.size());
  if (n < 1 || n > kMaxWorlds) throw std::invalid_argument("bad world list");
  m.frame.num_worlds = n;
  m.domains.assign(static_cast<size_t>(n), 0);
  for (auto& [id, pairs] : j.at("relations").items()) {
    auto& rows = m.frame.relation(id);
    for (const auto& pr : pairs) {
      int a = remap.at(pr.at(0).get<int>());
      int b = remap.at(pr.at(1).get<int>());
      rows[static_cast<size_t>(a)] |= uint64_t{1} << b;
    }
  }
  for (auto& [ws, es] : j.at("domains").items()) {
    int w = remap.at(std::stoi(ws));
    for (int e : es.get<std::vector<int>>()) {
      if (e < 0 || e >= kMaxElems) throw std::invalid_argument("element out of range");
      m.domains[static_cast<size_t>(w)] |= uint64_t{1} << e;
    }
  }
  if (j.contains("preds"))
    for (auto& [p, per] : j.at("preds").items()) {
      auto& rows = m.preds[p];
      rows.assign(static_cast<size_t>(n), 0);
      for (auto& [ws, es] : per.items()) {
        int w = remap.at(std::stoi(ws));
        for (int e : es.get<std::vector<int>>()) rows[static_cast<size_t>(w)] |= uint64_t{1} << e;
      }
    }
  if (j.contains("consts"))
    for (auto& [c, per] : j.at("consts").items()) {
      auto& vals = m.consts[c];
      vals.assign(static_cast<size_t>(n), 0);
      for (auto& [ws, e] : per.items()) vals[static_cast<size_t>(remap.at(std::stoi(ws)))] = e.get<int>();
    }
  std::string mode = j.at("mode").get<std::string>();
  if (mode == "xd")
    m.mode = DomainMode::Expanding;
  else if (mode == "cd")
    m.mode = DomainMode::Constant;
  else
    throw std::invalid_argument("mode must be xd or cd");
  if (j.contains("frontier"))
    for (int w : j.at("frontier").get<std::vector<int>>())
      m.frontier |= uint64_t{1} << remap.at(w);
  return m;
}

inline std::string model_to_text(const FOKripkeModel& m) { return model_to_json(m).dump(2) + "\n"; }
inline FOKripkeModel model_from_text(const std::string& s) {
  return model_from_json(Json::parse(s));
}

// DOT dump of the frame, honest about nothing but the relations.
inline std::string frame_to_dot(const Frame& f) {
  std::string out = "digraph frame {\n";
  for (int w = 0; w < f.num_worlds; ++w) out += "  w" + std::to_string(w) + ";\n";
  for (const auto& [id, rows] : f.rel)
    for (int w = 0; w < f.num_worlds; ++w)
      for (int v = 0; v < f.num_worlds; ++v)
        if ((rows[static_cast<size_t>(w)] >> v) & 1)
          out += "  w" + std::to_string(w) + " -> w" + std::to_string(v) + " [label=\"" + id +
                 "\"];\n";
  out += "}\n";
  return out;
}

}  // namespace ovml
