#include "vgvae/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vgvae/errors.hpp"

namespace vgvae {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be a finite value >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("beta1 and beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (min_count < 1) throw ConfigError("min_count must be at least 1");
}

void RunConfig::validate() const {
  loss.validate();
  train.validate();
  if (loss.max_position != model.max_position) throw ConfigError("max_position differs between model and loss");
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(key + ": '" + v + "' is not a number");
  return out;
}

template <class T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(key + ": '" + v + "' is not a valid integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field size_field(T RunConfig::*group, std::size_t T::*member) {
  return {[=](RunConfig& c, const std::string& k, const std::string& v) {
            (c.*group).*member = parse_int<std::size_t>(k, v);
          },
          [=](const RunConfig& c) { return std::to_string((c.*group).*member); }};
}

template <class T>
Field int_field(T RunConfig::*group, int T::*member) {
  return {[=](RunConfig& c, const std::string& k, const std::string& v) { (c.*group).*member = parse_int<int>(k, v); },
          [=](const RunConfig& c) { return std::to_string((c.*group).*member); }};
}

template <class T>
Field double_field(T RunConfig::*group, double T::*member) {
  return {[=](RunConfig& c, const std::string& k, const std::string& v) { (c.*group).*member = parse_double(k, v); },
          [=](const RunConfig& c) { return fmt_double((c.*group).*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = [] {
    using M = ModelConfig;
    using L = LossConfig;
    using T = TrainConfig;
    auto m = &RunConfig::model;
    auto l = &RunConfig::loss;
    auto t = &RunConfig::train;
    std::vector<std::pair<std::string, Field>> v;
    v.emplace_back("model", Field{[](RunConfig& c, const std::string&, const std::string& s) {
                                    c.model.kind = parse_model_kind(s);
                                  },
                                  [](const RunConfig& c) { return to_string(c.model.kind); }});
    v.emplace_back("encoder", Field{[](RunConfig& c, const std::string&, const std::string& s) {
                                      c.model.encoder = parse_encoder_kind(s);
                                    },
                                    [](const RunConfig& c) { return to_string(c.model.encoder); }});
    v.emplace_back("decoder", Field{[](RunConfig& c, const std::string&, const std::string& s) {
                                      c.model.decoder = parse_decoder_kind(s);
                                    },
                                    [](const RunConfig& c) { return to_string(c.model.decoder); }});
    v.emplace_back("latent_dim_m", size_field(m, &M::latent_dim_m));
    v.emplace_back("latent_dim_d", size_field(m, &M::latent_dim_d));
    v.emplace_back("embed_dim", size_field(m, &M::embed_dim));
    v.emplace_back("lstm_hidden", size_field(m, &M::lstm_hidden));
    v.emplace_back("decoder_hidden", size_field(m, &M::decoder_hidden));
    v.emplace_back("encoder_hidden", size_field(m, &M::encoder_hidden));
    v.emplace_back("wpl_hidden", size_field(m, &M::wpl_hidden));
    // one key drives both copies
    v.emplace_back("max_position", Field{[](RunConfig& c, const std::string& k, const std::string& s) {
                                           c.model.max_position = c.loss.max_position =
                                               parse_int<std::size_t>(k, s);
                                         },
                                         [](const RunConfig& c) { return std::to_string(c.model.max_position); }});
    v.emplace_back("losses", Field{[](RunConfig& c, const std::string&, const std::string& s) { c.loss.set_losses(s); },
                                   [](const RunConfig& c) { return c.loss.losses(); }});
    v.emplace_back("kl_weight_y", double_field(l, &L::kl_weight_y));
    v.emplace_back("kl_weight_z", double_field(l, &L::kl_weight_z));
    v.emplace_back("rec_weight", double_field(l, &L::rec_weight));
    v.emplace_back("prl_weight", double_field(l, &L::prl_weight));
    v.emplace_back("wpl_weight", double_field(l, &L::wpl_weight));
    v.emplace_back("dpl_margin", double_field(l, &L::dpl_margin));
    v.emplace_back("dpl_start_epoch", int_field(l, &L::dpl_start_epoch));
    v.emplace_back("megabatch_k", size_field(l, &L::megabatch_k));
    v.emplace_back("batch_size", size_field(t, &T::batch_size));
    v.emplace_back("epochs", int_field(t, &T::epochs));
    v.emplace_back("lr", double_field(t, &T::lr));
    v.emplace_back("beta1", double_field(t, &T::beta1));
    v.emplace_back("beta2", double_field(t, &T::beta2));
    v.emplace_back("epsilon", double_field(t, &T::epsilon));
    v.emplace_back("clip_norm", double_field(t, &T::clip_norm));
    v.emplace_back("seed", Field{[](RunConfig& c, const std::string& k, const std::string& s) {
                                   c.train.seed = parse_int<std::uint64_t>(k, s);
                                 },
                                 [](const RunConfig& c) { return std::to_string(c.train.seed); }});
    v.emplace_back("checkpoint_every", size_field(t, &T::checkpoint_every));
    v.emplace_back("dev_path", Field{[](RunConfig& c, const std::string&, const std::string& s) { c.train.dev_path = s; },
                                     [](const RunConfig& c) { return c.train.dev_path; }});
    v.emplace_back("scramble", Field{[](RunConfig& c, const std::string& k, const std::string& s) {
                                       c.train.scramble = parse_bool(k, s);
                                     },
                                     [](const RunConfig& c) { return std::string(c.train.scramble ? "true" : "false"); }});
    v.emplace_back("min_count", size_field(t, &T::min_count));
    return v;
  }();
  return f;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, f] : fields())
    if (name == key) {
      f.set(cfg, key, value);
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_text(RunConfig& cfg, const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key=value");
    try {
      apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void apply_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_text(cfg, ss.str(), path.string());
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, f] : fields()) out += name + "=" + f.get(cfg) + "\n";
  return out;
}

RunConfig from_text(const std::string& text) {
  RunConfig cfg;
  apply_text(cfg, text);
  return cfg;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("VGVAE_SEED");
  if (!v || !*v) return std::nullopt;
  return parse_int<std::uint64_t>("VGVAE_SEED", v);
}

}  // namespace vgvae
