#include "optdiverse/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>

namespace optdiverse {

namespace {

struct Entry {
  std::string key;
  std::string value;
  std::string where;
};

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const Entry& e, const std::string& why) {
  throw ConfigError(e.where + ": " + e.key + ": " + why);
}

double parse_double(const Entry& e) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) fail(e, "malformed number '" + e.value + "'");
  return v;
}

long long parse_int(const Entry& e) {
  long long v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) fail(e, "malformed integer '" + e.value + "'");
  return v;
}

std::uint64_t parse_u64(const Entry& e) {
  std::uint64_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) fail(e, "malformed unsigned integer '" + e.value + "'");
  return v;
}

bool parse_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  fail(e, "expected true or false, got '" + e.value + "'");
}

int parse_count(const Entry& e, long long min_value) {
  const long long v = parse_int(e);
  if (v < min_value || v > 1'000'000'000)
    fail(e, "out of range (must be >= " + std::to_string(min_value) + "), got " + e.value);
  return static_cast<int>(v);
}

double parse_positive(const Entry& e) {
  const double v = parse_double(e);
  if (!(v > 0.0)) fail(e, "out of range (must be > 0), got " + e.value);
  return v;
}

double parse_unit(const Entry& e) {
  const double v = parse_double(e);
  if (!(v >= 0.0 && v <= 1.0)) fail(e, "out of range (must lie in [0, 1]), got " + e.value);
  return v;
}

Algorithm parse_algorithm(const Entry& e) {
  if (e.value == "oc") return Algorithm::oc;
  if (e.value == "deoc") return Algorithm::deoc;
  if (e.value == "tdeoc") return Algorithm::tdeoc;
  fail(e, "expected oc, deoc or tdeoc, got '" + e.value + "'");
}

using Setter = std::function<void(ExperimentConfig&, const Entry&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"algorithm", [](ExperimentConfig&, const Entry&) {}},
      {"environment",
       [](ExperimentConfig& c, const Entry& e) {
         if (e.value == "four_rooms")
           c.environment = Environment::four_rooms;
         else if (e.value == "tmaze")
           c.environment = Environment::tmaze;
         else
           fail(e, "expected four_rooms or tmaze, got '" + e.value + "'");
       }},
      {"termination_lr", [](ExperimentConfig& c, const Entry& e) { c.rates.alpha_beta = parse_positive(e); }},
      {"intra_option_lr", [](ExperimentConfig& c, const Entry& e) { c.rates.alpha_pi = parse_positive(e); }},
      {"critic_lr", [](ExperimentConfig& c, const Entry& e) { c.rates.alpha_critic = parse_positive(e); }},
      {"discount",
       [](ExperimentConfig& c, const Entry& e) {
         const double v = parse_double(e);
         if (!(v >= 0.0 && v < 1.0)) fail(e, "out of range (must lie in [0, 1)), got " + e.value);
         c.gamma = v;
       }},
      {"max_steps", [](ExperimentConfig& c, const Entry& e) { c.max_steps = parse_count(e, 1); }},
      {"num_options", [](ExperimentConfig& c, const Entry& e) { c.n_options = parse_count(e, 2); }},
      {"temperature", [](ExperimentConfig& c, const Entry& e) { c.temperature = parse_positive(e); }},
      {"epsilon", [](ExperimentConfig& c, const Entry& e) { c.epsilon = parse_unit(e); }},
      {"slip_probability", [](ExperimentConfig& c, const Entry& e) { c.slip_probability = parse_unit(e); }},
      {"policy_step",
       [](ExperimentConfig& c, const Entry& e) {
         if (e.value == "logit")
           c.variant.policy_step = PolicyStep::logit;
         else if (e.value == "parameter")
           c.variant.policy_step = PolicyStep::parameter;
         else
           fail(e, "expected logit or parameter, got '" + e.value + "'");
       }},
      {"tau", [](ExperimentConfig& c, const Entry& e) { c.variant.tau = parse_unit(e); }},
      {"augment_reward", [](ExperimentConfig& c, const Entry& e) { c.variant.augment_reward = parse_bool(e); }},
      {"update_terminations",
       [](ExperimentConfig& c, const Entry& e) { c.variant.update_terminations = parse_bool(e); }},
      {"bonus_terms",
       [](ExperimentConfig& c, const Entry& e) {
         BonusSpec& b = c.variant.bonus;
         b.include_divergence = b.include_option_entropies = b.include_policy_over_options_entropy = false;
         std::string_view rest = e.value;
         while (!rest.empty()) {
           const auto comma = rest.find(',');
           const auto term = trim(rest.substr(0, comma));
           if (term == "divergence")
             b.include_divergence = true;
           else if (term == "option_entropies")
             b.include_option_entropies = true;
           else if (term == "selection_entropy")
             b.include_policy_over_options_entropy = true;
           else
             fail(e, "unknown bonus term '" + std::string(term) + "'");
           if (comma == std::string_view::npos) break;
           rest.remove_prefix(comma + 1);
         }
         if (!b.include_divergence && !b.include_option_entropies && !b.include_policy_over_options_entropy)
           fail(e, "at least one bonus term required");
       }},
      {"pair_budget", [](ExperimentConfig& c, const Entry& e) { c.variant.bonus.pair_budget = parse_count(e, 1); }},
      {"pair_direction",
       [](ExperimentConfig& c, const Entry& e) {
         if (e.value == "sampled")
           c.variant.bonus.direction = PairDirection::sampled;
         else if (e.value == "symmetric")
           c.variant.bonus.direction = PairDirection::symmetric;
         else
           fail(e, "expected sampled or symmetric, got '" + e.value + "'");
       }},
      {"option_value",
       [](ExperimentConfig& c, const Entry& e) {
         if (e.value == "max")
           c.variant.value_mode = OptionValueMode::max;
         else if (e.value == "epsilon_greedy")
           c.variant.value_mode = OptionValueMode::epsilon_greedy;
         else
           fail(e, "expected max or epsilon_greedy, got '" + e.value + "'");
       }},
      {"episodes_total", [](ExperimentConfig& c, const Entry& e) { c.episodes_total = parse_count(e, 1); }},
      {"transfer_episode", [](ExperimentConfig& c, const Entry& e) { c.transfer_episode = parse_count(e, 0); }},
      {"num_runs", [](ExperimentConfig& c, const Entry& e) { c.n_runs = parse_count(e, 1); }},
      {"base_seed", [](ExperimentConfig& c, const Entry& e) { c.base_seed = parse_u64(e); }},
      {"tracker_mode",
       [](ExperimentConfig& c, const Entry& e) {
         if (e.value == "moving_mean")
           c.tracker_mode = TrackerMode::moving_mean_center;
         else if (e.value == "buffer")
           c.tracker_mode = TrackerMode::buffer_standardize;
         else
           fail(e, "expected moving_mean or buffer, got '" + e.value + "'");
       }},
      {"buffer_capacity",
       [](ExperimentConfig& c, const Entry& e) { c.buffer_capacity = static_cast<std::size_t>(parse_count(e, 2)); }},
  };
  return table;
}

Entry split_entry(std::string_view line, std::string where) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value', got '" + std::string(line) + "'");
  Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), std::move(where)};
  if (e.key.empty()) throw ConfigError(e.where + ": missing key");
  if (e.value.empty()) fail(e, "missing value");
  if (!setters().contains(e.key)) throw ConfigError(e.where + ": unknown key '" + e.key + "'");
  return e;
}

// Shortest %g form that reads back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::oc: return "oc";
    case Algorithm::deoc: return "deoc";
    case Algorithm::tdeoc: return "tdeoc";
  }
  return "?";
}

std::string_view to_string(Environment e) {
  return e == Environment::four_rooms ? "four_rooms" : "tmaze";
}

std::string_view to_string(TrackerMode m) {
  return m == TrackerMode::moving_mean_center ? "moving_mean" : "buffer";
}

ExperimentConfig ExperimentConfig::defaults(Algorithm algorithm) {
  ExperimentConfig c;
  switch (algorithm) {
    case Algorithm::oc:
      c.variant = AlgorithmVariant::oc();
      c.rates.alpha_beta = 1e-1;
      break;
    case Algorithm::deoc:
      c.variant = AlgorithmVariant::deoc(0.1);
      c.rates.alpha_beta = 1e-1;
      break;
    case Algorithm::tdeoc:
      c.variant = AlgorithmVariant::tdeoc();
      c.rates.alpha_beta = 5e-2;
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  rates.validate();
  variant.validate(/*sparse_reward=*/true);
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("discount: must lie in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon: must lie in [0, 1]");
  if (!(slip_probability >= 0.0 && slip_probability <= 1.0))
    throw ConfigError("slip_probability: must lie in [0, 1]");
  if (!(temperature > 0.0)) throw ConfigError("temperature: must be > 0");
  if (n_options < 2) throw ConfigError("num_options: must be >= 2");
  if (max_steps < 1) throw ConfigError("max_steps: must be >= 1");
  if (n_runs < 1) throw ConfigError("num_runs: must be >= 1");
  if (transfer_episode < 0 || transfer_episode >= episodes_total)
    throw ConfigError("transfer_episode: must be < episodes_total (" + std::to_string(transfer_episode) +
                      " vs " + std::to_string(episodes_total) + ")");
  if (tracker_mode == TrackerMode::buffer_standardize && buffer_capacity < 2)
    throw ConfigError("buffer_capacity: must be >= 2");
}

ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  std::vector<Entry> entries;
  int line_no = 0;
  while (!text.empty() || line_no == 0) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) entries.push_back(split_entry(line, "line " + std::to_string(line_no)));
    if (text.empty()) break;
  }
  for (const auto& o : overrides) entries.push_back(split_entry(trim(o), "override '" + o + "'"));

  Algorithm algorithm = Algorithm::tdeoc;
  for (const auto& e : entries)
    if (e.key == "algorithm") algorithm = parse_algorithm(e);

  ExperimentConfig cfg = ExperimentConfig::defaults(algorithm);
  const auto& table = setters();
  for (const auto& e : entries) table.find(e.key)->second(cfg, e);
  cfg.validate();
  return cfg;
}

std::string format_config(const ExperimentConfig& c) {
  std::string bonus;
  auto add = [&](const char* term) {
    if (!bonus.empty()) bonus += ',';
    bonus += term;
  };
  if (c.variant.bonus.include_divergence) add("divergence");
  if (c.variant.bonus.include_option_entropies) add("option_entropies");
  if (c.variant.bonus.include_policy_over_options_entropy) add("selection_entropy");

  std::string out;
  auto kv = [&](std::string_view k, const std::string& v) {
    out.append(k);
    out += " = ";
    out += v;
    out += '\n';
  };
  kv("algorithm", std::string(to_string(c.variant.tag)));
  kv("environment", std::string(to_string(c.environment)));
  kv("termination_lr", fmt_double(c.rates.alpha_beta));
  kv("intra_option_lr", fmt_double(c.rates.alpha_pi));
  kv("critic_lr", fmt_double(c.rates.alpha_critic));
  kv("discount", fmt_double(c.gamma));
  kv("max_steps", std::to_string(c.max_steps));
  kv("num_options", std::to_string(c.n_options));
  kv("temperature", fmt_double(c.temperature));
  kv("epsilon", fmt_double(c.epsilon));
  kv("slip_probability", fmt_double(c.slip_probability));
  kv("policy_step", c.variant.policy_step == PolicyStep::logit ? "logit" : "parameter");
  kv("tau", fmt_double(c.variant.tau));
  kv("augment_reward", c.variant.augment_reward ? "true" : "false");
  kv("update_terminations", c.variant.update_terminations ? "true" : "false");
  kv("bonus_terms", bonus);
  kv("pair_budget", std::to_string(c.variant.bonus.pair_budget));
  kv("pair_direction", c.variant.bonus.direction == PairDirection::sampled ? "sampled" : "symmetric");
  kv("option_value", c.variant.value_mode == OptionValueMode::max ? "max" : "epsilon_greedy");
  kv("episodes_total", std::to_string(c.episodes_total));
  kv("transfer_episode", std::to_string(c.transfer_episode));
  kv("num_runs", std::to_string(c.n_runs));
  kv("base_seed", std::to_string(c.base_seed));
  kv("tracker_mode", std::string(to_string(c.tracker_mode)));
  kv("buffer_capacity", std::to_string(c.buffer_capacity));
  return out;
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

}  // namespace optdiverse
