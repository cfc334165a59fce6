#include "spalf/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace spalf {

using nlohmann::json;

std::string model_to_json(const ModelSpec& model) {
  json j;
  j["d"] = model.d;
  json drift = json::array();
  for (int i = 0; i < model.d; ++i) {
    json row = json::array();
    for (int c = 0; c < model.d; ++c) row.push_back(model.drift(i, c));
    drift.push_back(row);
  }
  j["drift"] = drift;
  j["q"] = model.diffusion;
  json cols = json::array();
  for (const auto& col : model.jumps) {
    json arr = json::array();
    for (const auto& comp : col) {
      json c;
      c["rate"] = comp.rate;
      if (model.is_lattice()) c["units"] = comp.units;
      else c["delta"] = comp.delta;
      arr.push_back(c);
    }
    cols.push_back(arr);
  }
  j["jumps"] = cols;
  if (model.is_lattice()) j["k"] = model.lattice_k;
  return j.dump(2);
}

ModelSpec model_from_json(const std::string& text) {
  json j = json::parse(text);
  for (const char* key : {"d", "drift", "q", "jumps"})
    if (!j.contains(key)) throw std::invalid_argument(std::string("model config: missing key '") + key + "'");
  int d = j.at("d").get<int>();
  Mat drift(d, d);
  const json& dr = j.at("drift");
  if (static_cast<int>(dr.size()) != d) throw std::invalid_argument("model config: key 'drift' must be d x d");
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < d; ++c) drift(i, c) = dr.at(i).at(c).get<double>();
  Vec q = j.at("q").get<Vec>();
  std::vector<std::vector<JumpComponent>> jumps(d);
  const json& cols = j.at("jumps");
  if (static_cast<int>(cols.size()) != d) throw std::invalid_argument("model config: key 'jumps' must have d columns");
  bool lattice = j.contains("k");
  for (int col = 0; col < d; ++col)
    for (const json& c : cols.at(col)) {
      JumpComponent comp;
      comp.rate = c.at("rate").get<double>();
      if (c.contains("units")) {
        comp.units = c.at("units").get<std::vector<long long>>();
        comp.delta.assign(comp.units.size(), 0.0);
      } else {
        comp.delta = c.at("delta").get<Vec>();
      }
      jumps[col].push_back(std::move(comp));
    }
  if (lattice) return ModelSpec::lattice(j.at("k").get<int>(), drift, std::move(jumps));
  return ModelSpec::continuous(std::move(drift), std::move(q), std::move(jumps));
}

std::string step_law_to_json(const StepLaw& law) {
  json j;
  j["d"] = law.d;
  j["k"] = law.k;
  json cols = json::array();
  for (const auto& col : law.cols) {
    json arr = json::array();
    for (const auto& e : col) {
      json c;
      c["units"] = e.units;
      c["p"] = e.prob.str();
      arr.push_back(c);
    }
    cols.push_back(arr);
  }
  j["cols"] = cols;
  return j.dump(2);
}

StepLaw step_law_from_json(const std::string& text) {
  json j = json::parse(text);
  StepLaw law;
  law.d = j.at("d").get<int>();
  law.k = j.at("k").get<int>();
  for (const json& col : j.at("cols")) {
    std::vector<StepLaw::Entry> entries;
    for (const json& c : col)
      entries.push_back({c.at("units").get<std::vector<long long>>(), Rational::parse(c.at("p").get<std::string>())});
    law.cols.push_back(std::move(entries));
  }
  law.validate();
  return law;
}

std::string path_to_json(const PathBundle& path) {
  json j;
  j["d"] = path.d;
  j["H"] = path.horizon;
  j["k"] = path.k;
  json cols = json::array();
  for (int c = 0; c < path.d; ++c) {
    const PathColumn& col = path.cols[c];
    json jc;
    jc["drift"] = col.drift;
    json events = json::array();
    const int m = col.events();
    for (int e = 0; e < m; ++e) {
      json je;
      je["t"] = col.times[e];
      if (path.is_lattice()) {
        std::vector<long long> units(path.d);
        for (int i = 0; i < path.d; ++i)
          units[i] = col.cum_units[static_cast<size_t>(i) * (m + 1) + e + 1] -
                     col.cum_units[static_cast<size_t>(i) * (m + 1) + e];
        je["units"] = units;
      } else {
        Vec delta(path.d);
        for (int i = 0; i < path.d; ++i)
          delta[i] = col.cum[static_cast<size_t>(i) * (m + 1) + e + 1] -
                     col.cum[static_cast<size_t>(i) * (m + 1) + e];
        je["delta"] = delta;
      }
      events.push_back(je);
    }
    jc["events"] = events;
    cols.push_back(jc);
  }
  j["cols"] = cols;
  return j.dump(2);
}

PathBundle path_from_json(const std::string& text) {
  json j = json::parse(text);
  int d = j.at("d").get<int>();
  double H = j.at("H").get<double>();
  int k = j.at("k").get<int>();
  if (k > 0) {
    std::vector<std::vector<std::pair<double, std::vector<long long>>>> events(d);
    for (int c = 0; c < d; ++c)
      for (const json& je : j.at("cols").at(c).at("events"))
        events[c].push_back({je.at("t").get<double>(), je.at("units").get<std::vector<long long>>()});
    return PathBundle::lattice(d, H, k, events);
  }
  std::vector<Vec> drifts(d);
  std::vector<std::vector<std::pair<double, Vec>>> events(d);
  for (int c = 0; c < d; ++c) {
    drifts[c] = j.at("cols").at(c).at("drift").get<Vec>();
    for (const json& je : j.at("cols").at(c).at("events"))
      events[c].push_back({je.at("t").get<double>(), je.at("delta").get<Vec>()});
  }
  return PathBundle::continuous(d, H, drifts, events);
}

std::uint64_t model_hash(const ModelSpec& model) {
  std::string s = model_to_json(model);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << content;
}

}  // namespace spalf
