#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cmvno/errors.hpp"
#include "cmvno/harness.hpp"

namespace cmvno {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

json dist_to_json(const DiscreteDistribution& d) {
  return {{"values", d.values}, {"probabilities", d.probabilities}};
}

DiscreteDistribution dist_from_json(const json& j, const char* where) {
  DiscreteDistribution d;
  if (j.contains("uniform_int")) {
    check_keys(j, {"uniform_int"}, where);
    const auto lo = j.at("uniform_int").at(0).get<long>();
    const auto hi = j.at("uniform_int").at(1).get<long>();
    if (hi < lo) throw ConfigError(std::string(where) + ": empty uniform_int range");
    for (long v = lo; v <= hi; ++v) {
      d.values.push_back(static_cast<double>(v));
      d.probabilities.push_back(1.0 / static_cast<double>(hi - lo + 1));
    }
    return d;
  }
  check_keys(j, {"values", "probabilities"}, where);
  d.values = j.at("values").get<std::vector<double>>();
  if (j.contains("probabilities")) {
    d.probabilities = j.at("probabilities").get<std::vector<double>>();
  } else {
    d.probabilities.assign(d.values.size(), d.values.empty() ? 0.0 : 1.0 / d.values.size());
  }
  return d;
}

json gain_to_json(const GainDistribution& g) {
  if (const auto* r = std::get_if<RayleighGain>(&g)) return {{"type", "rayleigh"}, {"sigma", r->sigma}};
  return {{"type", "fixed"}, {"value", std::get<FixedGain>(g).value}};
}

GainDistribution gain_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "rayleigh") {
    check_keys(j, {"type", "sigma"}, "gain");
    return RayleighGain{j.at("sigma").get<double>()};
  }
  if (type == "fixed") {
    check_keys(j, {"type", "value"}, "gain");
    return FixedGain{j.at("value").get<double>()};
  }
  throw ConfigError("unknown gain type '" + type + "' (expected rayleigh, fixed)");
}

json occupancy_to_json(const Occupancy& o) {
  if (const auto* i = std::get_if<IidOccupancy>(&o)) return {{"type", "iid"}, {"p_idle", i->p_idle}};
  const auto& m = std::get<MarkovOccupancy>(o);
  return {{"type", "markov"},
          {"p_busy_to_idle", m.p_busy_to_idle},
          {"p_idle_to_idle", m.p_idle_to_idle},
          {"prev_state", m.prev_state}};
}

Occupancy occupancy_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "iid") {
    check_keys(j, {"type", "p_idle"}, "occupancy");
    return IidOccupancy{j.at("p_idle").get<double>()};
  }
  if (type == "markov") {
    check_keys(j, {"type", "p_busy_to_idle", "p_idle_to_idle", "prev_state"}, "occupancy");
    return MarkovOccupancy{j.at("p_busy_to_idle").get<double>(),
                           j.at("p_idle_to_idle").get<double>(), get_or(j, "prev_state", 1)};
  }
  throw ConfigError("unknown occupancy type '" + type + "' (expected iid, markov)");
}

json channel_to_json(const ChannelModel& ch) {
  json j;
  if (ch.band == Band::kSensing) {
    j["eta"] = ch.collision_tolerance;
    j["occupancy"] = occupancy_to_json(ch.occupancy);
  }
  json gains = json::array();
  for (const auto& g : ch.gain) gains.push_back(gain_to_json(g));
  j["gain"] = gains;
  return j;
}

// A channel entry may carry "count" to stand for that many identical channels.
void channels_from_json(const json& arr, Band band, std::vector<ChannelModel>& out) {
  if (!arr.is_array()) throw ConfigError("channel lists must be arrays");
  for (const auto& j : arr) {
    if (band == Band::kSensing) {
      check_keys(j, {"count", "eta", "occupancy", "gain"}, "sensing channel");
    } else {
      check_keys(j, {"count", "gain"}, "leasing channel");
    }
    ChannelModel ch;
    ch.band = band;
    if (band == Band::kSensing) {
      ch.collision_tolerance = j.at("eta").get<double>();
      ch.occupancy = occupancy_from_json(j.at("occupancy"));
    }
    for (const auto& g : j.at("gain")) ch.gain.push_back(gain_from_json(g));
    const int count = get_or(j, "count", 1);
    if (count < 1) throw ConfigError("channel count must be at least 1");
    for (int k = 0; k < count; ++k) out.push_back(ch);
  }
}

json demand_to_json(const DemandModel& d) {
  json apps = json::array();
  for (const auto& a : d.applications) {
    apps.push_back({{"share", a.share}, {"file_length", dist_to_json(a.file_length)}});
  }
  json j = {{"family", to_string(d.family)},
            {"scale", d.scale},
            {"q_max", d.q_max},
            {"a_max", d.a_max},
            {"applications", apps}};
  if (!d.table.empty()) j["table"] = d.table;
  return j;
}

DemandModel demand_from_json(const json& j) {
  check_keys(j, {"family", "scale", "q_max", "a_max", "table", "applications"}, "demand");
  DemandModel d;
  d.family = demand_family_from_string(j.at("family").get<std::string>());
  d.scale = get_or(j, "scale", d.scale);
  d.q_max = get_or(j, "q_max", d.q_max);
  d.a_max = get_or(j, "a_max", d.a_max);
  if (j.contains("table")) d.table = j.at("table").get<std::vector<std::pair<double, double>>>();
  for (const auto& a : j.at("applications")) {
    check_keys(a, {"share", "file_length"}, "application");
    d.applications.push_back({get_or(a, "share", 1.0), dist_from_json(a.at("file_length"), "file_length")});
  }
  return d;
}

json to_json_value(const ExperimentConfig& c) {
  const auto& p = c.policy;
  json menu = json::array();
  for (const auto& t : p.menu) {
    menu.push_back({{"cost", t.cost}, {"p_fa", t.p_false_alarm}, {"p_md", t.p_missed_detection}});
  }
  json sensing = json::array();
  for (const auto& ch : p.environment.sensing) sensing.push_back(channel_to_json(ch));
  json leasing = json::array();
  for (const auto& ch : p.environment.leasing) leasing.push_back(channel_to_json(ch));

  json j = {
      {"name", c.name},
      {"mode", p.mode == PolicyMode::kSingleQueue ? "pmc" : "mpmc"},
      {"occupancy", p.occupancy == OccupancyMode::kIid ? "iid" : "markov"},
      {"V", c.tradeoffs},
      {"horizon", c.horizon},
      {"replications", c.replications},
      {"seed", c.seed},
      {"burn_in", c.burn_in},
      {"p_max", p.p_max},
      {"r_max", p.rate_cap},
      {"strict_bounds", p.strict_bounds},
      {"fixed_tech", p.fixed_tech ? json(*p.fixed_tech) : json(nullptr)},
      {"menu", menu},
      {"demand", demand_to_json(p.demand)},
      {"market", dist_to_json(p.environment.market)},
      {"leasing_price", dist_to_json(p.environment.leasing_price)},
      {"gain_semantics", p.environment.gain_semantics == GainSemantics::kAmplitude ? "amplitude" : "power"},
      {"queues", p.environment.queues},
      {"channels", {{"sensing", sensing}, {"leasing", leasing}}},
  };
  if (c.sweep) {
    json strategies = json::array();
    for (const auto& s : c.sweep->strategies) {
      strategies.push_back({{"name", s.name}, {"tech", s.tech ? json(*s.tech) : json(nullptr)}});
    }
    j["sweep"] = {{"p_idle", c.sweep->p_idle}, {"strategies", strategies}};
  }
  return j;
}

ExperimentConfig from_json_value(const json& j) {
  check_keys(j,
             {"name", "mode", "occupancy", "V", "horizon", "replications", "seed", "burn_in", "p_max",
              "r_max", "strict_bounds", "fixed_tech", "menu", "demand", "market", "leasing_price",
              "gain_semantics", "queues", "channels", "sweep"},
             "experiment");
  ExperimentConfig c;
  auto& p = c.policy;
  c.name = get_or<std::string>(j, "name", c.name);

  const auto mode = get_or<std::string>(j, "mode", "pmc");
  if (mode == "pmc") {
    p.mode = PolicyMode::kSingleQueue;
  } else if (mode == "mpmc") {
    p.mode = PolicyMode::kMultiQueue;
  } else {
    throw ConfigError("mode must be pmc or mpmc");
  }
  const auto occ = get_or<std::string>(j, "occupancy", "iid");
  if (occ == "iid") {
    p.occupancy = OccupancyMode::kIid;
  } else if (occ == "markov") {
    p.occupancy = OccupancyMode::kMarkov;
  } else {
    throw ConfigError("occupancy must be iid or markov");
  }

  if (j.contains("V")) {
    c.tradeoffs = j.at("V").is_array() ? j.at("V").get<std::vector<double>>()
                                       : std::vector<double>{j.at("V").get<double>()};
  }
  c.horizon = get_or(j, "horizon", c.horizon);
  c.replications = get_or(j, "replications", c.replications);
  c.seed = get_or(j, "seed", c.seed);
  c.burn_in = get_or(j, "burn_in", c.burn_in);
  p.p_max = get_or(j, "p_max", p.p_max);
  p.rate_cap = get_or(j, "r_max", p.rate_cap);
  p.strict_bounds = get_or(j, "strict_bounds", p.strict_bounds);
  if (j.contains("fixed_tech") && !j.at("fixed_tech").is_null()) {
    p.fixed_tech = j.at("fixed_tech").get<std::size_t>();
  }
  for (const auto& t : j.at("menu")) {
    check_keys(t, {"cost", "p_fa", "p_md"}, "menu entry");
    p.menu.push_back({t.at("cost").get<double>(), t.at("p_fa").get<double>(), t.at("p_md").get<double>()});
  }
  p.demand = demand_from_json(j.at("demand"));
  p.environment.market = dist_from_json(j.at("market"), "market");
  p.environment.leasing_price = dist_from_json(j.at("leasing_price"), "leasing_price");
  const auto sem = get_or<std::string>(j, "gain_semantics", "amplitude");
  if (sem == "amplitude") {
    p.environment.gain_semantics = GainSemantics::kAmplitude;
  } else if (sem == "power") {
    p.environment.gain_semantics = GainSemantics::kPower;
  } else {
    throw ConfigError("gain_semantics must be amplitude or power");
  }
  p.environment.queues = get_or<std::size_t>(j, "queues", 1);
  const auto& ch = j.at("channels");
  check_keys(ch, {"sensing", "leasing"}, "channels");
  if (ch.contains("sensing")) channels_from_json(ch.at("sensing"), Band::kSensing, p.environment.sensing);
  if (ch.contains("leasing")) channels_from_json(ch.at("leasing"), Band::kLeasing, p.environment.leasing);

  if (j.contains("sweep") && !j.at("sweep").is_null()) {
    const auto& s = j.at("sweep");
    check_keys(s, {"p_idle", "strategies"}, "sweep");
    SweepSpec spec;
    spec.p_idle = s.at("p_idle").get<std::vector<double>>();
    for (const auto& st : s.at("strategies")) {
      check_keys(st, {"name", "tech"}, "sweep strategy");
      SweepStrategy strategy{st.at("name").get<std::string>(), std::nullopt};
      if (st.contains("tech") && !st.at("tech").is_null()) strategy.tech = st.at("tech").get<std::size_t>();
      spec.strategies.push_back(strategy);
    }
    c.sweep = spec;
  }
  if (!c.tradeoffs.empty()) p.tradeoff = c.tradeoffs.front();
  validate(c);
  return c;
}

}  // namespace

std::string to_json(const ExperimentConfig& config) { return to_json_value(config).dump(2) + "\n"; }

ExperimentConfig experiment_from_json(const std::string& text) {
  try {
    return from_json_value(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_from_json(ss.str());
}

}  // namespace cmvno
