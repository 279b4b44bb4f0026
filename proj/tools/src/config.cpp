#include "dsm_cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace dsm::cli {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads one object, remembering which keys were consumed.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  // Rejects keys that were never asked for.
  void done() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(join(path_, key) + ": unknown key");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  double number(const std::string& key, double fallback) {
    seen_.insert(key);
    if (!node_.contains(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(join(path_, key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(join(path_, key) + ": must be finite");
    return x;
  }

  std::optional<double> optional_number(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key) || node_.at(key).is_null()) return std::nullopt;
    return number(key, 0.0);
  }

  long integer(const std::string& key, long fallback) {
    seen_.insert(key);
    if (!node_.contains(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(path_, key) + ": expected an integer");
    return v.get<long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    seen_.insert(key);
    if (!node_.contains(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(join(path_, key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    seen_.insert(key);
    if (!node_.contains(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(join(path_, key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<int> int_list(const std::string& key) {
    seen_.insert(key);
    std::vector<int> out;
    if (!node_.contains(key)) return out;
    const auto& v = node_.at(key);
    if (!v.is_array()) throw ConfigError(join(path_, key) + ": expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) {
        throw ConfigError(join(path_, key) + "[" + std::to_string(i) + "]: expected an integer");
      }
      out.push_back(v[i].get<int>());
    }
    return out;
  }

  std::optional<Reader> child(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) return std::nullopt;
    return std::optional<Reader>(std::in_place, node_.at(key), join(path_, key));
  }

  std::string field(const std::string& key) const { return join(path_, key); }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void read_motility(Reader& r, MotilitySpec& m) {
  m.family = r.string("family", m.family);
  if (m.family == "logistic") {
    m.steepness = r.number("steepness", m.steepness);
    m.center = r.number("center", m.center);
    require(m.steepness > 0, r.field("steepness"), "must be positive");
  } else if (m.family == "exponential") {
    m.r0 = r.number("r0", m.r0);
    m.rate = r.number("rate", m.rate);
    require(m.r0 > 0, r.field("r0"), "must be positive");
    require(m.rate > 0, r.field("rate"), "must be positive");
  } else if (m.family == "custom") {
    m.kind = r.string("kind", "");
    if (m.kind == "constant") {
      m.value = r.number("value", m.value);
      require(m.value > 0, r.field("value"), "must be positive");
    } else if (m.kind == "hill") {
      m.r0 = r.number("r0", m.r0);
      m.half = r.number("half", m.half);
      m.hill = r.number("exponent", m.hill);
      require(m.r0 > 0, r.field("r0"), "must be positive");
      require(m.half > 0, r.field("half"), "must be positive");
      require(m.hill > 0, r.field("exponent"), "must be positive");
    } else {
      throw ConfigError(r.field("kind") + ": expected \"constant\" or \"hill\"");
    }
  } else {
    throw ConfigError(r.field("family") + ": expected logistic, exponential or custom");
  }
  r.done();
}

void read_simulate(Reader& r, SimulateSpec& s) {
  s.n = static_cast<int>(r.integer("n", s.n));
  s.dt = r.optional_number("dt");
  s.t_end = r.number("t_end", s.t_end);
  s.steady_tol = r.number("steady_tol", s.steady_tol);
  s.snapshot_every = r.number("snapshot_every", s.snapshot_every);
  s.b_max = r.number("b_max", s.b_max);
  s.format = r.string("format", s.format);
  require(s.n >= 16, r.field("n"), "must be at least 16");
  require(!s.dt || *s.dt > 0, r.field("dt"), "must be positive");
  require(s.t_end > 0, r.field("t_end"), "must be positive");
  require(s.steady_tol > 0, r.field("steady_tol"), "must be positive");
  require(s.snapshot_every > 0, r.field("snapshot_every"), "must be positive");
  require(s.b_max > 1, r.field("b_max"), "must exceed 1");
  require(s.format == "csv" || s.format == "binary", r.field("format"),
          "expected \"csv\" or \"binary\"");
  if (auto init = r.child("init")) {
    auto& i = s.init;
    i.kind = init->string("kind", i.kind);
    if (i.kind == "asymptotic") {
      i.j = static_cast<int>(init->integer("j", i.j));
      i.epsilon = init->number("epsilon", i.epsilon);
      i.u1_scale = init->number("u1_scale", i.u1_scale);
      require(i.j >= 1, init->field("j"), "must be at least 1");
    } else if (i.kind == "uniform_perturbed") {
      i.amplitude = init->number("amplitude", i.amplitude);
      require(i.amplitude >= 0 && i.amplitude < 1, init->field("amplitude"), "must lie in [0, 1)");
    } else {
      throw ConfigError(init->field("kind") + ": expected \"asymptotic\" or \"uniform_perturbed\"");
    }
    init->done();
  }
  if (auto noise = r.child("noise")) {
    s.noise = noise->number("amplitude", 0.0);
    s.noise_mirror = noise->boolean("mirror", true);
    require(s.noise >= 0 && s.noise < 1, noise->field("amplitude"), "must lie in [0, 1)");
    noise->done();
  }
  r.done();
}

void read_continue(Reader& r, ContinueSpec& c) {
  auto& o = c.options;
  c.j = static_cast<int>(r.integer("j", c.j));
  c.sigma_min = r.number("sigma_min", c.sigma_min);
  c.ds = r.number("ds", c.ds);
  o.n = static_cast<int>(r.integer("n", o.n));
  o.delta = r.number("delta", o.delta);
  o.ds_min = r.number("ds_min", o.ds_min);
  o.ds_max = r.number("ds_max", o.ds_max);
  o.newton_tol = r.number("newton_tol", o.newton_tol);
  o.max_iters = static_cast<int>(r.integer("max_iters", o.max_iters));
  o.b_max = r.number("b_max", o.b_max);
  o.max_points = static_cast<int>(r.integer("max_points", o.max_points));
  require(c.j >= 1, r.field("j"), "must be at least 1");
  require(c.sigma_min >= 0, r.field("sigma_min"), "must be nonnegative");
  require(c.ds > 0, r.field("ds"), "must be positive");
  require(o.n >= 16, r.field("n"), "must be at least 16");
  require(o.delta > 0, r.field("delta"), "must be positive");
  require(o.ds_min > 0 && o.ds_min <= o.ds_max, r.field("ds_min"), "need 0 < ds_min <= ds_max");
  require(o.newton_tol > 0, r.field("newton_tol"), "must be positive");
  require(o.max_iters >= 1, r.field("max_iters"), "must be at least 1");
  require(o.b_max > 1, r.field("b_max"), "must exceed 1");
  require(o.max_points >= 2, r.field("max_points"), "must be at least 2");
  r.done();
}

}  // namespace

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MotilityModel MotilitySpec::build() const {
  if (family == "logistic") return MotilityModel::logistic(steepness, center);
  if (family == "exponential") return MotilityModel::exponential(r0, rate);
  if (kind == "constant") {
    const double c = value;
    return MotilityModel::custom([c](double) { return c; }, "constant(" + std::to_string(c) + ")");
  }
  const double a = r0, k = half, m = hill;
  return MotilityModel::custom([a, k, m](double v) { return a / (1.0 + std::pow(std::abs(v) / k, m)); },
                               "hill(r0=" + std::to_string(a) + ", half=" + std::to_string(k) +
                                   ", exponent=" + std::to_string(m) + ")");
}

SimConfig ExperimentConfig::sim_config() const {
  SimConfig c;
  c.params = params;
  c.motility = motility.build();
  c.n = simulate.n;
  c.dt = simulate.dt;
  c.t_end = simulate.t_end;
  c.steady_tol = simulate.steady_tol;
  c.snapshot_every = simulate.snapshot_every;
  c.b_max = simulate.b_max;
  if (simulate.init.kind == "asymptotic") {
    c.init = AsymptoticMode{simulate.init.j, simulate.init.epsilon, simulate.init.u1_scale};
  } else {
    c.init = UniformPerturbed{simulate.init.amplitude, seed};
  }
  c.noise = {simulate.noise, seed, simulate.noise_mirror};
  return c;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.hash = fnv1a_hex(nlohmann::json::object().dump());
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::string what = e.what();
    const auto at = what.find("at line");
    throw ConfigError("malformed JSON " +
                      (at != std::string::npos ? what.substr(at)
                                               : "at " + line_column(text, e.byte) + ": " + what));
  }
  ExperimentConfig cfg;
  {
    Reader r(root, "");
    if (auto p = r.child("params")) {
      cfg.params.D = p->number("D", cfg.params.D);
      cfg.params.sigma = p->number("sigma", cfg.params.sigma);
      cfg.params.l = p->number("l", cfg.params.l);
      require(cfg.params.D > 0, "params.D", "must be positive");
      require(cfg.params.sigma >= 0, "params.sigma", "must be nonnegative");
      require(cfg.params.l > 0, "params.l", "must be positive");
      p->done();
    }
    if (auto m = r.child("motility")) read_motility(*m, cfg.motility);
    const long seed = r.integer("seed", 0);
    require(seed >= 0, "seed", "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.output_dir = r.string("output_dir", cfg.output_dir.string());
    if (auto a = r.child("analyze")) {
      cfg.j_max = static_cast<int>(a->integer("j_max", 0));
      require(cfg.j_max >= 0, "analyze.j_max", "must be nonnegative");
      a->done();
    }
    if (auto e = r.child("expand")) {
      cfg.modes = e->int_list("modes");
      for (int j : cfg.modes) require(j >= 1, "expand.modes", "entries must be at least 1");
      e->done();
    }
    if (auto s = r.child("simulate")) read_simulate(*s, cfg.simulate);
    if (auto c = r.child("continue")) read_continue(*c, cfg.cont);
    if (auto rp = r.child("reproduce")) {
      cfg.reproduce_n = static_cast<int>(rp->integer("n", cfg.reproduce_n));
      require(cfg.reproduce_n >= 16, "reproduce.n", "must be at least 16");
      rp->done();
    }
    r.done();
  }
  json hashed = root;
  hashed.erase("output_dir");
  cfg.hash = fnv1a_hex(hashed.dump());
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace dsm::cli
