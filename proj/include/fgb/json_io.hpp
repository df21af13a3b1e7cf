#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fgb/engine.hpp"
#include "fgb/errors.hpp"
#include "fgb/finite_action.hpp"
#include "fgb/free_group.hpp"
#include "fgb/group_measure.hpp"
#include "fgb/rational.hpp"

namespace fgb {

using Json = nlohmann::ordered_json;

inline Json measure_to_json(const GroupMeasure& m) {
  Json out = Json::object();
  for (const auto& [g, w] : m.weights()) out[g.str()] = rational_to_string(w);
  return out;
}

inline GroupMeasure measure_from_json(const Json& j, int rank) {
  GroupMeasure::WeightMap weights;
  for (const auto& [word, value] : j.items())
    weights[ReducedWord::parse(word, rank)] = rational_from_string(value.get<std::string>());
  return GroupMeasure::from_weights(std::move(weights));
}

/// Finite action file format: {"points": n, "weights": ["p/q", ...]?,
/// "a": [perm], "b": [perm], ...} with one permutation per generator and
/// uniform weights when omitted.
inline FiniteAction action_from_json(const Json& j) {
  if (!j.contains("points")) throw InputError("action file needs \"points\"");
  const auto points = j.at("points").get<std::size_t>();
  std::vector<std::vector<int>> maps;
  for (int g = 0;; ++g) {
    std::string key(1, static_cast<char>('a' + g));
    if (!j.contains(key)) break;
    maps.push_back(j.at(key).get<std::vector<int>>());
  }
  if (maps.size() < 2) throw InputError("action file needs generators \"a\", \"b\", ...");
  std::vector<Rational> weights;
  if (j.contains("weights")) {
    for (const auto& w : j.at("weights")) weights.push_back(rational_from_string(w.get<std::string>()));
    if (weights.size() != points) throw InputError("weights length must equal points");
  } else {
    weights.assign(points, Rational(1, static_cast<long>(points)));
  }
  const int rank = static_cast<int>(maps.size());
  return FiniteAction(rank, std::move(weights), std::move(maps));
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  Json j;
  in >> j;
  return j;
}

inline FiniteAction action_from_file(const std::string& path) {
  return action_from_json(read_json_file(path));
}

// {"type": "indicator", "point": k, "subtract_mean": bool} or
// {"type": "values", "values": ["p/q", ...]}.
inline Observable observable_from_json(const Json& j, const FiniteAction& act) {
  const std::string type = j.value("type", std::string("indicator"));
  if (type == "indicator") {
    int at = j.at("point").get<int>();
    if (at < 0 || static_cast<std::size_t>(at) >= act.size())
      throw InputError("indicator point out of range");
    Observable f = indicator(act.size(), at);
    if (j.value("subtract_mean", false)) {
      Rational mean = integral(act, f);
      for (auto& v : f) v -= mean;
    }
    return f;
  }
  if (type == "values") {
    Observable f;
    for (const auto& v : j.at("values")) f.push_back(rational_from_string(v.get<std::string>()));
    if (f.size() != act.size()) throw InputError("values length must equal points");
    return f;
  }
  throw InputError("unknown observable type: " + type);
}

inline GroupMeasure kappa_from_json(const Json& j, int rank) { return measure_from_json(j, rank); }

inline CylinderDensity density_from_json(const Json& j) {
  CylinderDensity psi;
  psi.depth = j.value("depth", 0);
  if (j.contains("values")) {
    for (const auto& [key, value] : j.at("values").items())
      psi.values[key] = rational_from_string(value.get<std::string>());
  }
  return psi;
}

// Written once: stage to a temporary then rename into place.
inline void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write file: " + path);
    out << contents;
  }
  fs::rename(tmp, target);
}

}  // namespace fgb
