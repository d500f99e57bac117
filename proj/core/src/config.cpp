#include "stua/config.hpp"

#include "stua/csv_io.hpp"
#include "stua/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace stua::config {

namespace {

struct Field {
  std::string key;
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

long to_long(const std::string& key, const std::string& v) {
  try {
    return io::parse_long(v, key);
  } catch (const Error&) {
    fail(ErrorKind::InvalidConfig, key + ": expected an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return io::parse_double(v, key);
  } catch (const Error&) {
    fail(ErrorKind::InvalidConfig, key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorKind::InvalidConfig, key + ": expected true or false, got '" + v + "'");
}

template <class Get>
Field int_field(std::string key, Get ref) {
  return {key, [key, ref](Config& c, const std::string& v) { ref(c) = static_cast<int>(to_long(key, v)); },
          [ref](const Config& c) { return std::to_string(ref(const_cast<Config&>(c))); }};
}

template <class Get>
Field double_field(std::string key, Get ref) {
  return {key, [key, ref](Config& c, const std::string& v) { ref(c) = to_double(key, v); },
          [ref](const Config& c) { return io::format_double(ref(const_cast<Config&>(c))); }};
}

template <class Get>
Field bool_field(std::string key, Get ref) {
  return {key, [key, ref](Config& c, const std::string& v) { ref(c) = to_bool(key, v); },
          [ref](const Config& c) { return std::string(ref(const_cast<Config&>(c)) ? "true" : "false"); }};
}

std::string layers_text(const std::vector<datagen::Layer>& layers) {
  std::string out;
  for (auto l : layers) out += (out.empty() ? "" : ",") + std::string(datagen::to_string(l));
  return out;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"data.source", [](Config& c, const std::string& v) { c.source = v; },
                 [](const Config& c) { return c.source; }});
    f.push_back(int_field("data.regions", [](Config& c) -> int& { return c.synth.regions; }));
    f.push_back(int_field("data.days", [](Config& c) -> int& { return c.synth.days; }));
    f.push_back(int_field("data.intervals_per_day", [](Config& c) -> int& { return c.synth.intervals_per_day; }));
    f.push_back(double_field("data.base_amplitude", [](Config& c) -> double& { return c.synth.base_amplitude; }));
    f.push_back(double_field("data.daily_weight", [](Config& c) -> double& { return c.synth.daily_weight; }));
    f.push_back(double_field("data.weekly_weight", [](Config& c) -> double& { return c.synth.weekly_weight; }));
    f.push_back(double_field("data.event_rate", [](Config& c) -> double& { return c.synth.event_rate; }));
    f.push_back(double_field("data.event_amplitude", [](Config& c) -> double& { return c.synth.event_amplitude; }));
    f.push_back(double_field("data.weather_weight", [](Config& c) -> double& { return c.synth.weather_weight; }));
    f.push_back(double_field("data.noise_weight", [](Config& c) -> double& { return c.synth.noise_weight; }));
    f.push_back(int_field("data.context_factors", [](Config& c) -> int& { return c.synth.context_factors; }));
    f.push_back(double_field("data.extent_km", [](Config& c) -> double& { return c.synth.extent_km; }));
    f.push_back({"data.start_time",
                 [](Config& c, const std::string& v) { c.synth.start_time = io::parse_timestamp(v, "data.start_time"); },
                 [](const Config& c) { return io::format_timestamp(c.synth.start_time); }});
    f.push_back({"data.regions_csv", [](Config& c, const std::string& v) { c.regions_csv = v; },
                 [](const Config& c) { return c.regions_csv.generic_string(); }});
    f.push_back({"data.mobility_csv", [](Config& c, const std::string& v) { c.mobility_csv = v; },
                 [](const Config& c) { return c.mobility_csv.generic_string(); }});
    f.push_back({"data.context_csv", [](Config& c, const std::string& v) { c.context_csv = v; },
                 [](const Config& c) { return c.context_csv.generic_string(); }});
    f.push_back(int_field("data.interval_minutes", [](Config& c) -> int& { return c.interval_minutes; }));

    f.push_back(int_field("model.p", [](Config& c) -> int& { return c.model.p; }));
    f.push_back(int_field("model.q", [](Config& c) -> int& { return c.model.q; }));
    f.push_back(double_field("model.rho", [](Config& c) -> double& { return c.rho; }));
    f.push_back(double_field("model.flow_floor", [](Config& c) -> double& { return c.flow_floor; }));
    f.push_back(int_field("model.gcn_layers", [](Config& c) -> int& { return c.model.predictor.gcn_layers; }));
    f.push_back(int_field("model.gcn_hidden", [](Config& c) -> int& { return c.model.predictor.gcn_hidden; }));
    f.push_back(int_field("model.lstm_layers", [](Config& c) -> int& { return c.model.predictor.lstm_layers; }));
    f.push_back(int_field("model.lstm_hidden", [](Config& c) -> int& { return c.model.predictor.lstm_hidden; }));
    f.push_back(bool_field("model.input_skip", [](Config& c) -> bool& { return c.model.predictor.input_skip; }));
    f.push_back(bool_field("model.residual", [](Config& c) -> bool& { return c.model.predictor.residual; }));
    f.push_back(int_field("model.embed_width", [](Config& c) -> int& { return c.model.uncertainty.embed_width; }));
    f.push_back(int_field("model.field_width", [](Config& c) -> int& { return c.model.uncertainty.field_width; }));
    f.push_back(
        int_field("model.interaction_width", [](Config& c) -> int& { return c.model.uncertainty.interaction_width; }));
    f.push_back(int_field("model.fm_layers", [](Config& c) -> int& { return c.model.uncertainty.fm_layers; }));
    f.push_back(int_field("model.fm_hidden", [](Config& c) -> int& { return c.model.uncertainty.fm_hidden; }));
    f.push_back(int_field("model.evolve_layers", [](Config& c) -> int& { return c.model.uncertainty.evolve_layers; }));
    f.push_back(int_field("model.evolve_hidden", [](Config& c) -> int& { return c.model.uncertainty.evolve_hidden; }));

    f.push_back(double_field("train.learning_rate", [](Config& c) -> double& { return c.train.learning_rate; }));
    f.push_back(double_field("train.decay_factor", [](Config& c) -> double& { return c.train.decay_factor; }));
    f.push_back(int_field("train.decay_every", [](Config& c) -> int& { return c.train.decay_every; }));
    f.push_back(int_field("train.epochs", [](Config& c) -> int& { return c.train.epochs; }));
    f.push_back(int_field("train.batch_size", [](Config& c) -> int& { return c.train.batch_size; }));
    f.push_back({"train.seed",
                 [](Config& c, const std::string& v) {
                   const long s = to_long("train.seed", v);
                   if (s < 0) fail(ErrorKind::InvalidConfig, "train.seed must be >= 0");
                   c.train.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const Config& c) { return std::to_string(c.train.seed); }});
    f.push_back(bool_field("train.shuffle", [](Config& c) -> bool& { return c.train.shuffle; }));
    f.push_back(bool_field("train.quality_enabled", [](Config& c) -> bool& { return c.train.quality_enabled; }));
    f.push_back(double_field("train.train_fraction", [](Config& c) -> double& { return c.train_fraction; }));
    f.push_back(double_field("train.test_fraction", [](Config& c) -> double& { return c.test_fraction; }));
    f.push_back(double_field("train.validation_fraction", [](Config& c) -> double& { return c.validation_fraction; }));

    f.push_back({"turbulence.layers",
                 [](Config& c, const std::string& v) {
                   c.turbulence.layers.clear();
                   for (auto part : io::split(v, ',')) c.turbulence.layers.push_back(datagen::parse_layer(std::string(io::trim(part))));
                 },
                 [](const Config& c) { return layers_text(c.turbulence.layers); }});
    f.push_back(double_field("turbulence.noisy_fraction", [](Config& c) -> double& { return c.turbulence.noisy_fraction; }));
    f.push_back(double_field("turbulence.ood_fraction", [](Config& c) -> double& { return c.turbulence.ood_fraction; }));

    f.push_back(double_field("eval.mape_floor", [](Config& c) -> double& { return c.mape_floor; }));
    f.push_back(int_field("eval.ood_draws", [](Config& c) -> int& { return c.ood_draws; }));
    f.push_back(bool_field("eval.plots", [](Config& c) -> bool& { return c.plots; }));
    return f;
  }();
  return table;
}

}  // namespace

void Config::validate() const {
  if (source != "synth" && source != "csv") {
    fail(ErrorKind::InvalidConfig, "data.source must be 'synth' or 'csv', got '" + source + "'");
  }
  if (synth.regions < 2) fail(ErrorKind::InvalidConfig, "data.regions must be >= 2");
  if (synth.days < 1) fail(ErrorKind::InvalidConfig, "data.days must be >= 1");
  if (synth.intervals_per_day < 1) fail(ErrorKind::InvalidConfig, "data.intervals_per_day must be >= 1");
  if (synth.context_factors < 1) fail(ErrorKind::InvalidConfig, "data.context_factors must be >= 1");
  if (model.p < 1) fail(ErrorKind::InvalidConfig, "model.p must be >= 1");
  if (model.q < 0 || model.q > 7) fail(ErrorKind::InvalidConfig, "model.q must lie in 0..7");
  if (rho < 0.0) fail(ErrorKind::InvalidConfig, "model.rho must be >= 0");
  if (!(flow_floor > 0.0)) fail(ErrorKind::InvalidConfig, "model.flow_floor must be positive");
  train.validate();
  const double sum = train_fraction + test_fraction + validation_fraction;
  if (train_fraction <= 0.0 || test_fraction <= 0.0 || validation_fraction < 0.0 || std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorKind::InvalidConfig, "train/test/validation fractions must be positive and sum to 1");
  }
  if (turbulence.layers.empty()) fail(ErrorKind::InvalidConfig, "turbulence.layers must not be empty");
  if (turbulence.noisy_fraction < 0.0 || turbulence.ood_fraction < 0.0) {
    fail(ErrorKind::InvalidConfig, "turbulence fractions must be >= 0");
  }
  if (mape_floor < 0.0) fail(ErrorKind::InvalidConfig, "eval.mape_floor must be >= 0");
  if (ood_draws < 0) fail(ErrorKind::InvalidConfig, "eval.ood_draws must be >= 0");
}

Config parse(const std::string& text, const std::filesystem::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::Parse, std::string("config: ") + e.what());
  }

  std::map<std::string, const Field*> by_key;
  for (const Field& f : fields()) by_key[f.key] = &f;

  Config c;
  bool has_source = false;
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(ErrorKind::InvalidConfig, "key outside of a section: " + section);
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      auto it = by_key.find(full);
      if (it == by_key.end()) fail(ErrorKind::InvalidConfig, "unknown key " + full);
      it->second->set(c, unquote(node.get_value<std::string>()));
      has_source = has_source || full == "data.source";
    }
  }
  if (!has_source) fail(ErrorKind::InvalidConfig, "missing required key data.source");

  if (!base_dir.empty()) {
    for (auto* p : {&c.regions_csv, &c.mobility_csv, &c.context_csv}) {
      if (p->is_relative()) *p = base_dir / *p;
    }
  }
  c.validate();
  return c;
}

Config load(const std::filesystem::path& path) { return parse(io::read_file(path), path.parent_path()); }

std::string canonical(const Config& c) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(c) + "\n";
  return out;
}

std::string hash(const Config& c) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : canonical(c)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.key);
  return out;
}

}  // namespace stua::config
