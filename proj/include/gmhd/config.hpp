#pragma once

// Run configuration: a TOML document with the tables [grid], [time], [kernel],
// [init] and [output]. Parsing is strict: unknown keys, keys that do not apply
// to the selected kernel family or preset, and type mismatches are errors.

#include <toml.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"

namespace gmhd {

enum class Preset { OrszagTang, RandomBand, SingleMode };

inline const char* to_string(Preset p) {
  switch (p) {
    case Preset::OrszagTang: return "orszag_tang";
    case Preset::RandomBand: return "random_band";
    case Preset::SingleMode: return "single_mode";
  }
  return "orszag_tang";
}

struct InitConfig {
  Preset preset = Preset::OrszagTang;
  double amplitude = 1.0;
  double beta = 0.5;  // orszag_tang
  int k_min = 2;      // random_band
  int k_max = 8;
  std::optional<std::uint64_t> seed;
};

struct RunConfig {
  int n = 0;
  double t_end = 0.0;
  double cfl = 0.5;
  double dt_max = 0.01;
  int sample_every = 1;
  KernelProfile kernel = KernelProfile::power_law(0.5);
  InitConfig init;
  std::string output_dir = "out";
  bool snapshots = false;
};

namespace config_detail {

[[noreturn]] inline void fail(const std::string& what) { throw Error(errc::invalid_config, what); }

// Reads and removes keys from one table; leftovers are unknown keys.
class TableReader {
 public:
  TableReader(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {
    if (table_ != nullptr) {
      for (const auto& [k, v] : *table_) pending_.insert(std::string(k.str()));
    }
  }

  bool present() const { return table_ != nullptr; }
  bool has(const std::string& key) const { return table_ != nullptr && table_->contains(key); }

  double real(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const toml::node* node = take(key);
    if (node == nullptr) return require(key, fallback);
    if (auto v = node->value_exact<double>()) return *v;
    if (auto v = node->value_exact<std::int64_t>()) return static_cast<double>(*v);
    fail(path(key) + " must be a number");
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) {
    const toml::node* node = take(key);
    if (node == nullptr) return require(key, fallback);
    if (auto v = node->value_exact<std::int64_t>()) return *v;
    fail(path(key) + " must be an integer");
  }

  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt) {
    const toml::node* node = take(key);
    if (node == nullptr) return require(key, fallback);
    if (auto v = node->value_exact<bool>()) return *v;
    fail(path(key) + " must be a boolean");
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const toml::node* node = take(key);
    if (node == nullptr) return require(key, fallback);
    if (auto v = node->value_exact<std::string>()) return *v;
    fail(path(key) + " must be a string");
  }

  std::vector<double> reals(const std::string& key) {
    const toml::node* node = take(key);
    if (node == nullptr) fail("missing required key " + path(key));
    const auto* arr = node->as_array();
    if (arr == nullptr) fail(path(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& el : *arr) {
      if (auto v = el.value_exact<double>()) {
        out.push_back(*v);
      } else if (auto i = el.value_exact<std::int64_t>()) {
        out.push_back(static_cast<double>(*i));
      } else {
        fail(path(key) + " must be an array of numbers");
      }
    }
    return out;
  }

  void finish() const {
    if (!pending_.empty()) fail("unknown key " + path(*pending_.begin()));
  }

 private:
  const toml::node* take(const std::string& key) {
    if (table_ == nullptr) return nullptr;
    pending_.erase(key);
    return table_->get(key);
  }

  template <class T>
  T require(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) fail("missing required key " + path(key));
    return *fallback;
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> pending_;
};

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // Keep TOML floats recognizable as floats.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace config_detail

inline RunConfig parse_config_string(const std::string& text, const std::string& source = "config") {
  using config_detail::fail;
  using config_detail::TableReader;
  toml::table doc;
  try {
    doc = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ": " << e.description();
    fail(msg.str());
  }

  static const std::set<std::string> kTables = {"grid", "time", "kernel", "init", "output"};
  for (const auto& [k, v] : doc) {
    const std::string key(k.str());
    if (!kTables.count(key)) fail("unknown table [" + key + "]");
    if (!v.is_table()) fail("[" + key + "] must be a table");
  }

  RunConfig cfg;

  TableReader grid(doc["grid"].as_table(), "grid");
  if (!grid.present()) fail("missing table [grid]");
  const auto n = grid.integer("n");
  grid.finish();
  if (n % 2 != 0) throw Error(errc::rejected_odd_n, "grid.n must be even, got " + std::to_string(n));
  if (n < 32 || n > 8192) fail("grid.n must lie in [32, 8192]");
  cfg.n = static_cast<int>(n);

  TableReader time(doc["time"].as_table(), "time");
  if (!time.present()) fail("missing table [time]");
  cfg.t_end = time.real("t_end");
  cfg.cfl = time.real("cfl", 0.5);
  cfg.dt_max = time.real("dt_max", 0.01);
  const auto every = time.integer("sample_every", 1);
  time.finish();
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) fail("time.t_end must be finite and >= 0");
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) fail("time.cfl must lie in (0, 1]");
  if (!(cfg.dt_max > 0.0) || !std::isfinite(cfg.dt_max)) fail("time.dt_max must be positive");
  if (every < 1 || every > 1000000000) fail("time.sample_every must be a positive integer");
  cfg.sample_every = static_cast<int>(every);

  TableReader kernel(doc["kernel"].as_table(), "kernel");
  if (!kernel.present()) fail("missing table [kernel]");
  const std::string family = kernel.string("family");
  const bool override_weak = kernel.boolean("override_weak", false);
  if (family == "power_law") {
    cfg.kernel = KernelProfile::power_law(kernel.real("alpha"), override_weak);
  } else if (family == "log_weak") {
    const double e1 = kernel.real("eps1");
    const double e2 = kernel.real("eps2");
    cfg.kernel = KernelProfile::log_weak(e1, e2, override_weak);
  } else if (family == "tabulated") {
    auto radii = kernel.reals("radii");
    auto values = kernel.reals("values");
    cfg.kernel = KernelProfile::tabulated(std::move(radii), std::move(values), override_weak);
  } else {
    fail("kernel.family must be power_law, log_weak or tabulated, got '" + family + "'");
  }
  kernel.finish();

  TableReader init(doc["init"].as_table(), "init");
  if (!init.present()) fail("missing table [init]");
  const std::string preset = init.string("preset");
  cfg.init.amplitude = init.real("amplitude", 1.0);
  if (preset == "orszag_tang") {
    cfg.init.preset = Preset::OrszagTang;
    cfg.init.beta = init.real("beta", 0.5);
  } else if (preset == "random_band") {
    cfg.init.preset = Preset::RandomBand;
    const auto seed = init.integer("seed");
    if (seed < 0) fail("init.seed must be >= 0");
    cfg.init.seed = static_cast<std::uint64_t>(seed);
    const auto lo = init.integer("k_min", 2);
    const auto hi = init.integer("k_max", 8);
    if (lo < 1 || hi < lo || 3 * hi > n) fail("init.k_min/k_max must satisfy 1 <= k_min <= k_max <= n/3");
    cfg.init.k_min = static_cast<int>(lo);
    cfg.init.k_max = static_cast<int>(hi);
  } else if (preset == "single_mode") {
    cfg.init.preset = Preset::SingleMode;
  } else {
    fail("init.preset must be orszag_tang, random_band or single_mode, got '" + preset + "'");
  }
  init.finish();
  if (!std::isfinite(cfg.init.amplitude)) fail("init.amplitude must be finite");
  if (!std::isfinite(cfg.init.beta)) fail("init.beta must be finite");

  TableReader output(doc["output"].as_table(), "output");
  cfg.output_dir = output.string("dir", std::string("out"));
  cfg.snapshots = output.boolean("snapshots", false);
  output.finish();

  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) throw Error(errc::io_failure, "cannot open config " + path);
  std::string text;
  char buf[4096];
  for (std::size_t got; (got = std::fread(buf, 1, sizeof buf, f)) > 0;) text.append(buf, got);
  std::fclose(f);
  return parse_config_string(text, path);
}

/// Canonical TOML text; parse_config_string(serialize(c)) reproduces c.
inline std::string serialize(const RunConfig& cfg) {
  using config_detail::format_real;
  std::ostringstream out;
  out << "[grid]\nn = " << cfg.n << "\n\n";
  out << "[time]\nt_end = " << format_real(cfg.t_end) << "\ncfl = " << format_real(cfg.cfl)
      << "\ndt_max = " << format_real(cfg.dt_max) << "\nsample_every = " << cfg.sample_every << "\n\n";
  out << "[kernel]\n";
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          out << "family = \"power_law\"\nalpha = " << format_real(p.alpha) << '\n';
        } else if constexpr (std::is_same_v<T, LogWeak>) {
          out << "family = \"log_weak\"\neps1 = " << format_real(p.eps1) << "\neps2 = " << format_real(p.eps2)
              << '\n';
        } else {
          auto list = [&](const std::vector<double>& v) {
            out << '[';
            for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << format_real(v[i]);
            out << "]\n";
          };
          out << "family = \"tabulated\"\nradii = ";
          list(p.radii);
          out << "values = ";
          list(p.values);
        }
      },
      cfg.kernel.family);
  out << "override_weak = " << (cfg.kernel.override_weak ? "true" : "false") << "\n\n";
  out << "[init]\npreset = \"" << to_string(cfg.init.preset) << "\"\namplitude = " << format_real(cfg.init.amplitude)
      << '\n';
  if (cfg.init.preset == Preset::OrszagTang) out << "beta = " << format_real(cfg.init.beta) << '\n';
  if (cfg.init.preset == Preset::RandomBand) {
    out << "seed = " << cfg.init.seed.value_or(0) << "\nk_min = " << cfg.init.k_min << "\nk_max = " << cfg.init.k_max
        << '\n';
  }
  out << "\n[output]\ndir = \"";
  for (char c : cfg.output_dir) {
    if (c == '"' || c == '\\') out << '\\';
    out << c;
  }
  out << "\"\nsnapshots = " << (cfg.snapshots ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace gmhd
