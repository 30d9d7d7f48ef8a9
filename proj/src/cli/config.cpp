// SPDX-License-Identifier: Apache-2.0
#include "gfnm/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "gfnm/errors.hpp"
#include "gfnm/io/binary.hpp"

namespace gfnm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ConfigError(key + ": cannot parse '" + text + "' as a number");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(v)) throw ConfigError(key + ": must be finite");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Field {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field number(std::string name, T ExperimentConfig::*member) {
  return {name,
          [name, member](ExperimentConfig& c, const std::string& v) {
            c.*member = parse_number<T>(name, v);
          },
          [member](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return format_double(c.*member);
            else
              return std::to_string(c.*member);
          }};
}

Field flag(std::string name, bool ExperimentConfig::*member) {
  return {name,
          [name, member](ExperimentConfig& c, const std::string& v) { c.*member = parse_bool(name, v); },
          [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field text(std::string name, std::string ExperimentConfig::*member) {
  return {name, [member](ExperimentConfig& c, const std::string& v) { c.*member = v; },
          [member](const ExperimentConfig& c) { return c.*member; }};
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table = {
      number("K", &C::K),
      number("N", &C::N),
      number("S", &C::S),
      number("J", &C::J),
      number("eta", &C::eta),
      text("modulation", &C::modulation),
      number("snr_min", &C::snr_min),
      number("snr_max", &C::snr_max),
      flag("path_loss", &C::path_loss),
      number("U", &C::U),
      number("tau", &C::tau),
      {"data_mode", [](C& c, const std::string& v) { c.data_mode = detect::parse_data_mode(v); },
       [](const C& c) { return std::string(detect::to_string(c.data_mode)); }},
      flag("rotation_invariant", &C::rotation_invariant),
      number("L", &C::L),
      number("alpha", &C::alpha),
      number("psi", &C::psi),
      number("B", &C::B),
      number("rho_drop", &C::rho_drop),
      number("validation_split", &C::validation_split),
      number("delta1", &C::delta1),
      number("delta2", &C::delta2),
      number("lambda", &C::lambda),
      number("positive_weight", &C::positive_weight),
      number("epochs", &C::epochs),
      {"head_mode", [](C& c, const std::string& v) { c.head_mode = nn::parse_head_mode(v); },
       [](const C& c) { return std::string(nn::to_string(c.head_mode)); }},
      {"input_mode", [](C& c, const std::string& v) { c.input_mode = nn::parse_input_mode(v); },
       [](const C& c) { return std::string(nn::to_string(c.input_mode)); }},
      flag("bidirectional", &C::bidirectional),
      flag("attention", &C::attention),
      number("attention_span", &C::attention_span),
      flag("bias_correction", &C::bias_correction),
      number("clip_norm", &C::clip_norm),
      number("seed", &C::seed),
      number("trials", &C::trials),
      number("snr", &C::snr),
      number("workers", &C::workers),
      text("output_dir", &C::output_dir),
  };
  return table;
}

const Field& field(const std::string& key) {
  for (const Field& f : fields())
    if (f.name == key) return f;
  throw ConfigError("unknown key '" + key + "'");
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.name);
  return out;
}

void set_field(ExperimentConfig& config, const std::string& key, const std::string& value) {
  field(key).set(config, value);
}

std::string get_field(const ExperimentConfig& config, const std::string& key) {
  return field(key).get(config);
}

void apply_text(ExperimentConfig& config, const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    try {
      set_field(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig c;
  apply_text(c, text, source);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = io::read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(std::string(bytes.begin(), bytes.end()), path);
}

std::string to_text(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += f.name + " = " + f.get(config) + "\n";
  return out;
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "': expected key=value");
  set_field(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

bool apply_seed_env(ExperimentConfig& config) {
  const char* env = std::getenv("GFNM_SEED");
  if (!env || !*env) return false;
  try {
    set_field(config, "seed", env);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("GFNM_SEED: ") + e.what());
  }
  return true;
}

void validate(const ExperimentConfig& c) {
  check(c.K >= 1, "K: must be >= 1");
  check(c.N >= 1, "N: must be >= 1");
  check(c.J >= 1, "J: must be >= 1");
  check(c.S >= 1, "S: must be >= 1");
  check(c.S <= c.K, "S: " + std::to_string(c.S) + " exceeds K=" + std::to_string(c.K));
  check(c.eta >= 0.0 && c.eta <= 1.0, "eta: must lie in [0, 1]");
  check(c.modulation == "qpsk", "modulation: only qpsk is supported");
  check(c.snr_max >= c.snr_min, "snr_max: must be >= snr_min");
  check(c.tau > 0.0 && c.tau < 1.0, "tau: must lie strictly between 0 and 1");
  check(c.L >= 1, "L: must be >= 1");
  check(c.alpha >= 1, "alpha: must be >= 1");
  check(c.psi > 0.0, "psi: must be > 0");
  check(c.B >= 2, "B: must be >= 2 (batch statistics)");
  check(c.rho_drop >= 0.0 && c.rho_drop < 1.0, "rho_drop: must lie in [0, 1)");
  check(c.validation_split >= 0.0 && c.validation_split < 1.0,
        "validation_split: must lie in [0, 1)");
  check(c.delta1 >= 0.0 && c.delta1 < 1.0, "delta1: must lie in [0, 1)");
  check(c.delta2 >= 0.0 && c.delta2 < 1.0, "delta2: must lie in [0, 1)");
  check(c.lambda >= 0.0, "lambda: must be >= 0");
  check(c.positive_weight > 0.0, "positive_weight: must be > 0");
  check(c.epochs >= 1, "epochs: must be >= 1");
  check(c.clip_norm >= 0.0, "clip_norm: must be >= 0");
  check(c.trials >= 1, "trials: must be >= 1");
  check(c.workers >= 1, "workers: must be >= 1");
  check(!c.output_dir.empty(), "output_dir: must not be empty");
}

SystemConfig system_config(const ExperimentConfig& c) {
  SystemConfig s;
  s.num_devices = c.K;
  s.spreading_length = c.N;
  s.sparsity = c.S;
  s.slots = c.J;
  s.eta = c.eta;
  s.path_loss.enabled = c.path_loss;
  return s;
}

nn::ArchitectureConfig architecture(const ExperimentConfig& c) {
  nn::ArchitectureConfig a;
  a.width = c.alpha;
  a.hidden_layers = c.L;
  a.bidirectional = c.bidirectional;
  a.attention = c.attention;
  a.attention_span = c.attention_span;
  a.head = c.head_mode;
  a.input = c.input_mode;
  return a;
}

nn::TrainConfig train_config(const ExperimentConfig& c) {
  nn::TrainConfig t;
  t.batch_size = c.B;
  t.dropout = c.rho_drop;
  t.l2 = c.lambda;
  t.threshold = c.tau;
  t.validation_split = c.validation_split;
  t.learning_rate = c.psi;
  t.beta1 = c.delta1;
  t.beta2 = c.delta2;
  t.bias_correction = c.bias_correction;
  t.clip_norm = c.clip_norm;
  t.positive_weight = c.positive_weight;
  t.seed = c.seed;
  return t;
}

detect::DetectorConfig detector_config(const ExperimentConfig& c) {
  return {c.tau, c.data_mode};
}

}  // namespace gfnm::cli
