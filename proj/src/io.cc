#include "dfmsynth/io.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dfmsynth/errors.h"
#include "digest.h"

namespace dfmsynth {

using nlohmann::json;

bool Scenario::operator==(const Scenario& o) const {
  auto tank_eq = [](const TankParams& a, const TankParams& b) {
    return a.area_cm2 == b.area_cm2 && a.height_cm == b.height_cm && a.pump_lpm == b.pump_lpm &&
           a.sample_s == b.sample_s && a.band.lo == b.band.lo && a.band.hi == b.band.hi &&
           a.threshold == b.threshold;
  };
  return tank_eq(tank, o.tank) && threshold_tie == o.threshold_tie && objective_rho == o.objective_rho &&
         objective_mu == o.objective_mu && base_cells == o.base_cells && schedule == o.schedule &&
         max_level == o.max_level && delta_rho == o.delta_rho && delta_mu == o.delta_mu && tau == o.tau &&
         tie_order == o.tie_order && sim_x0 == o.sim_x0 && sim_steps == o.sim_steps;
}

Scenario reference_scenario() {
  Scenario s;
  s.tank = reference_tank_params();
  for (int i = 0; i <= 12; ++i) s.sim_x0.push_back(s.tank.height_cm * Rational(i, 12));
  return s;
}

namespace {

const json& section(const json& root, const char* key) {
  if (!root.contains(key)) throw ConfigError(std::string("scenario is missing section '") + key + "'");
  const json& j = root.at(key);
  if (!j.is_object()) throw ConfigError(std::string("section '") + key + "' must be an object");
  return j;
}

void only_keys(const json& j, const char* where, std::initializer_list<const char*> keys) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

const json& field(const json& j, const char* where, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing '") + key + "' in " + where);
  return j.at(key);
}

Rational rational_field(const json& j, const char* where, const char* key) {
  const json& v = field(j, where, key);
  if (!v.is_string()) throw ConfigError(std::string("'") + key + "' in " + where + " must be a rational string");
  return parse_rational(v.get<std::string>());
}

std::string string_field(const json& j, const char* where, const char* key, std::initializer_list<const char*> accepted) {
  const json& v = field(j, where, key);
  if (!v.is_string()) throw ConfigError(std::string("'") + key + "' in " + where + " must be a string");
  const std::string s = v.get<std::string>();
  for (const char* a : accepted) {
    if (s == a) return s;
  }
  throw ConfigError("unsupported value '" + s + "' for '" + key + "' in " + where);
}

std::int64_t integer_field(const json& j, const char* where, const char* key, std::int64_t min) {
  const json& v = field(j, where, key);
  if (!v.is_number_integer()) throw ConfigError(std::string("'") + key + "' in " + where + " must be an integer");
  const auto n = v.get<std::int64_t>();
  if (n < min) throw ConfigError(std::string("'") + key + "' in " + where + " is below " + std::to_string(min));
  return n;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("scenario must be a JSON object");
  only_keys(root, "scenario", {"plant", "objective", "abstraction", "delta", "synthesis", "sim"});
  Scenario s;

  const json& p = section(root, "plant");
  only_keys(p, "plant", {"kind", "area_cm2", "height_cm", "pump_lpm", "sample_s", "band", "threshold", "threshold_tie"});
  string_field(p, "plant", "kind", {"tank"});
  s.tank.area_cm2 = rational_field(p, "plant", "area_cm2");
  s.tank.height_cm = rational_field(p, "plant", "height_cm");
  s.tank.pump_lpm = rational_field(p, "plant", "pump_lpm");
  s.tank.sample_s = rational_field(p, "plant", "sample_s");
  const json& band = field(p, "plant", "band");
  if (!band.is_array() || band.size() != 2 || !band[0].is_string() || !band[1].is_string()) {
    throw ConfigError("'band' in plant must be two rational strings");
  }
  s.tank.band = {parse_rational(band[0].get<std::string>()), parse_rational(band[1].get<std::string>())};
  s.tank.threshold = rational_field(p, "plant", "threshold");
  s.threshold_tie = string_field(p, "plant", "threshold_tie", {"full"});

  const json& o = section(root, "objective");
  only_keys(o, "objective", {"rho", "mu"});
  s.objective_rho = string_field(o, "objective", "rho", {"zero"});
  s.objective_mu = string_field(o, "objective", "mu", {"indicator_v"});

  const json& a = section(root, "abstraction");
  only_keys(a, "abstraction", {"base_cells", "schedule", "max_level"});
  s.base_cells = static_cast<std::size_t>(integer_field(a, "abstraction", "base_cells", 1));
  s.schedule = string_field(a, "abstraction", "schedule", {"double"});
  s.max_level = static_cast<int>(integer_field(a, "abstraction", "max_level", 1));
  if (s.max_level > 20) throw ConfigError("'max_level' in abstraction is above 20");

  const json& d = section(root, "delta");
  only_keys(d, "delta", {"rho", "mu"});
  s.delta_rho = string_field(d, "delta", "rho", {"one"});
  s.delta_mu = string_field(d, "delta", "mu", {"identity_w"});

  const json& syn = section(root, "synthesis");
  only_keys(syn, "synthesis", {"tau", "tie_order"});
  s.tau = rational_field(syn, "synthesis", "tau");
  if (s.tau <= 0) throw ConfigError("'tau' in synthesis must be positive");
  const json& ties = field(syn, "synthesis", "tie_order");
  if (!ties.is_array()) throw ConfigError("'tie_order' in synthesis must be an array");
  s.tie_order.clear();
  for (const auto& t : ties) {
    if (!t.is_string()) throw ConfigError("'tie_order' entries must be strings");
    s.tie_order.push_back(t.get<std::string>());
  }

  const json& sim = section(root, "sim");
  only_keys(sim, "sim", {"x0", "steps"});
  const json& x0 = field(sim, "sim", "x0");
  if (!x0.is_array()) throw ConfigError("'x0' in sim must be an array");
  for (const auto& x : x0) {
    if (!x.is_string()) throw ConfigError("'x0' entries must be rational strings");
    s.sim_x0.push_back(parse_rational(x.get<std::string>()));
  }
  s.sim_steps = static_cast<std::size_t>(integer_field(sim, "sim", "steps", 0));

  try {
    scenario_plant(s);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("invalid plant: ") + e.what());
  }
  const auto controls = scenario_plant(s).control_names();
  for (const auto& t : s.tie_order) {
    if (std::find(controls.begin(), controls.end(), t) == controls.end()) {
      throw ConfigError("tie_order names unknown control '" + t + "'");
    }
  }
  for (const auto& x : s.sim_x0) {
    if (x < 0 || x > s.tank.height_cm) throw ConfigError("sim x0 " + to_string(x) + " outside [0, h]");
  }
  return s;
}

namespace {

json scenario_json(const Scenario& s) {
  json x0 = json::array();
  for (const auto& x : s.sim_x0) x0.push_back(to_string(x));
  return {
      {"plant",
       {{"kind", "tank"},
        {"area_cm2", to_string(s.tank.area_cm2)},
        {"height_cm", to_string(s.tank.height_cm)},
        {"pump_lpm", to_string(s.tank.pump_lpm)},
        {"sample_s", to_string(s.tank.sample_s)},
        {"band", {to_string(s.tank.band.lo), to_string(s.tank.band.hi)}},
        {"threshold", to_string(s.tank.threshold)},
        {"threshold_tie", s.threshold_tie}}},
      {"objective", {{"rho", s.objective_rho}, {"mu", s.objective_mu}}},
      {"abstraction", {{"base_cells", s.base_cells}, {"schedule", s.schedule}, {"max_level", s.max_level}}},
      {"delta", {{"rho", s.delta_rho}, {"mu", s.delta_mu}}},
      {"synthesis", {{"tau", to_string(s.tau)}, {"tie_order", s.tie_order}}},
      {"sim", {{"x0", x0}, {"steps", s.sim_steps}}},
  };
}

}  // namespace

std::string write_scenario(const Scenario& scenario) { return scenario_json(scenario).dump(2) + "\n"; }

Plant1D scenario_plant(const Scenario& scenario) {
  if (scenario.threshold_tie != "full") throw ConfigError("only threshold_tie \"full\" is supported");
  return make_tank(scenario.tank);
}

Objective scenario_objective(const Scenario&) { return reach_and_hold_objective(); }

ErrorModel scenario_error_model(const Scenario& scenario) {
  const auto controls = scenario_plant(scenario).control_names();
  return mismatch_error_model(controls);
}

PipelineOptions scenario_pipeline_options(const Scenario& scenario) {
  PipelineOptions o;
  o.base_cells = scenario.base_cells;
  o.max_level = scenario.max_level;
  o.tau = scenario.tau;
  o.tie_order = scenario.tie_order;
  return o;
}

namespace {

constexpr const char* kCertificateFormat = "dfmsynth-certificate/1";

json certificate_body(const CertificateDocument& doc) {
  const Certificate& c = doc.certificate;
  json values = json::object();
  for (const auto& [label, v] : c.values) values[label] = to_string(v);
  return {
      {"format", kCertificateFormat},
      {"level", c.level},
      {"cells", c.cells},
      {"gamma_bound", to_string(c.gamma_bound)},
      {"tau", to_string(c.tau)},
      {"delta_bound", to_string(c.delta_bound)},
      {"value_bound", to_string(c.value_bound)},
      {"chain", c.chain},
      {"digests", {{"plant", c.plant_digest}, {"observer", c.observer_digest}, {"controller", c.controller_digest}}},
      {"values", values},
      {"controller_states", c.controller_states},
      {"scenario", scenario_json(doc.scenario)},
      {"controller_table", write_dfm_table(doc.controller)},
  };
}

}  // namespace

std::string write_certificate(const CertificateDocument& document) {
  json body = certificate_body(document);
  body["content_digest"] = internal::sha256_hex(body.dump());
  return body.dump(2) + "\n";
}

CertificateDocument read_certificate(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw CertificateError(std::string("certificate is not valid JSON: ") + e.what());
  }
  try {
    if (!root.is_object() || !root.contains("content_digest")) throw CertificateError("certificate has no content digest");
    const std::string digest = root.at("content_digest").get<std::string>();
    json body = root;
    body.erase("content_digest");
    if (internal::sha256_hex(body.dump()) != digest) throw CertificateError("certificate content digest mismatch");
    if (body.at("format") != kCertificateFormat) throw CertificateError("unknown certificate format");

    CertificateDocument doc;
    doc.scenario = parse_scenario(body.at("scenario").dump());
    doc.controller = read_dfm_table(body.at("controller_table").get<std::string>());
    Certificate& c = doc.certificate;
    c.level = body.at("level").get<int>();
    c.cells = body.at("cells").get<std::size_t>();
    c.gamma_bound = parse_rational(body.at("gamma_bound").get<std::string>());
    c.tau = parse_rational(body.at("tau").get<std::string>());
    c.delta_bound = parse_rational(body.at("delta_bound").get<std::string>());
    c.value_bound = parse_rational(body.at("value_bound").get<std::string>());
    c.chain = body.at("chain").get<std::vector<std::string>>();
    const json& d = body.at("digests");
    c.plant_digest = d.at("plant").get<std::string>();
    c.observer_digest = d.at("observer").get<std::string>();
    c.controller_digest = d.at("controller").get<std::string>();
    for (const auto& item : body.at("values").items()) {
      c.values[item.key()] = parse_rational(item.value().get<std::string>());
    }
    c.controller_states = body.at("controller_states").get<std::size_t>();
    return doc;
  } catch (const json::exception& e) {
    throw CertificateError(std::string("malformed certificate: ") + e.what());
  } catch (const CertificateError&) {
    throw;
  } catch (const Error& e) {
    throw CertificateError(std::string("malformed certificate: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << contents;
  if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace dfmsynth
