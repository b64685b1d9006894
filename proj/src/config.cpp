#include "carnot_fbp/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/io.hpp"

namespace cfbp {

std::uint64_t fnv1a64(const std::string& s) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

int group_dim(GroupKind k) {
  switch (k) {
    case GroupKind::euclid1: return 1;
    case GroupKind::euclid2: return 2;
    default: return 3;
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw std::invalid_argument("expected a number, got '" + v + "'");
  return x;
}

long to_long(const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& v) { return static_cast<int>(to_long(v)); }

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<double> to_doubles(const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (const auto& s : split_list(v)) out.push_back(to_double(s));
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_same_v<T, double>)
      s += format_number(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

struct Key {
  const char* section;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, Key>>& key_table() {
  static const std::vector<std::pair<std::string, Key>> table = {
      {"group", {"domain", [](RunConfig& c, const std::string& v) { c.group = group_kind_from_string(v); },
                 [](const RunConfig& c) { return to_string(c.group); }}},
      {"lo", {"domain", [](RunConfig& c, const std::string& v) { c.lo = to_doubles(v); },
              [](const RunConfig& c) { return join(c.lo); }}},
      {"hi", {"domain", [](RunConfig& c, const std::string& v) { c.hi = to_doubles(v); },
              [](const RunConfig& c) { return join(c.hi); }}},
      {"nodes", {"domain",
                 [](RunConfig& c, const std::string& v) {
                   c.nodes.clear();
                   for (const auto& s : split_list(v)) c.nodes.push_back(to_int(s));
                 },
                 [](const RunConfig& c) { return join(c.nodes); }}},
      {"lambda", {"model", [](RunConfig& c, const std::string& v) { c.model.lambda = to_double(v); },
                  [](const RunConfig& c) { return format_number(c.model.lambda); }}},
      {"beta", {"model", [](RunConfig& c, const std::string& v) { c.model.beta = to_double(v); },
                [](const RunConfig& c) { return format_number(c.model.beta); }}},
      {"delta", {"model", [](RunConfig& c, const std::string& v) { c.model.delta = to_double(v); },
                 [](const RunConfig& c) { return format_number(c.model.delta); }}},
      {"p", {"model", [](RunConfig& c, const std::string& v) { c.model.p = to_double(v); },
             [](const RunConfig& c) { return format_number(c.model.p); }}},
      {"a0", {"model", [](RunConfig& c, const std::string& v) { c.model.a0 = to_double(v); },
              [](const RunConfig& c) { return format_number(c.model.a0); }}},
      {"a1", {"model", [](RunConfig& c, const std::string& v) { c.model.a1 = to_double(v); },
              [](const RunConfig& c) { return format_number(c.model.a1); }}},
      {"g_kind", {"model", [](RunConfig& c, const std::string& v) { c.model.g_kind = g_kind_from_string(v); },
                  [](const RunConfig& c) { return to_string(c.model.g_kind); }}},
      {"eps0", {"schedule", [](RunConfig& c, const std::string& v) { c.eps0 = to_double(v); },
                [](const RunConfig& c) { return format_number(c.eps0); }}},
      {"J", {"schedule", [](RunConfig& c, const std::string& v) { c.J = to_int(v); },
             [](const RunConfig& c) { return std::to_string(c.J); }}},
      {"tol", {"solver", [](RunConfig& c, const std::string& v) { c.tol = to_double(v); },
               [](const RunConfig& c) { return format_number(c.tol); }}},
      {"max_iter", {"solver", [](RunConfig& c, const std::string& v) { c.max_iter = to_int(v); },
                    [](const RunConfig& c) { return std::to_string(c.max_iter); }}},
      {"path_points", {"solver", [](RunConfig& c, const std::string& v) { c.path_points = to_int(v); },
                       [](const RunConfig& c) { return std::to_string(c.path_points); }}},
      {"mp_max_iter", {"solver", [](RunConfig& c, const std::string& v) { c.mp_max_iter = to_int(v); },
                       [](const RunConfig& c) { return std::to_string(c.mp_max_iter); }}},
      {"restarts", {"solver", [](RunConfig& c, const std::string& v) { c.restarts = to_int(v); },
                    [](const RunConfig& c) { return std::to_string(c.restarts); }}},
      {"solve_eps", {"solver", [](RunConfig& c, const std::string& v) { c.solve_eps = to_double(v); },
                     [](const RunConfig& c) { return format_number(c.solve_eps); }}},
      {"lambda_min", {"sweep", [](RunConfig& c, const std::string& v) { c.lambda_min = to_double(v); },
                      [](const RunConfig& c) { return format_number(c.lambda_min); }}},
      {"lambda_max", {"sweep", [](RunConfig& c, const std::string& v) { c.lambda_max = to_double(v); },
                      [](const RunConfig& c) { return format_number(c.lambda_max); }}},
      {"lambda_count", {"sweep", [](RunConfig& c, const std::string& v) { c.lambda_count = to_int(v); },
                        [](const RunConfig& c) { return std::to_string(c.lambda_count); }}},
      {"rel_width", {"sweep", [](RunConfig& c, const std::string& v) { c.rel_width = to_double(v); },
                     [](const RunConfig& c) { return format_number(c.rel_width); }}},
      {"betas", {"sweep", [](RunConfig& c, const std::string& v) { c.betas = to_doubles(v); },
                 [](const RunConfig& c) { return join(c.betas); }}},
      {"out", {"run", [](RunConfig& c, const std::string& v) { c.out = v; },
               [](const RunConfig& c) { return c.out; }}},
      {"seed", {"run", [](RunConfig& c, const std::string& v) {
                  const long s = to_long(v);
                  if (s < 0) throw std::invalid_argument("seed must be >= 0");
                  c.seed = static_cast<std::uint64_t>(s);
                },
                [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"threads", {"run", [](RunConfig& c, const std::string& v) { c.threads = to_int(v); },
                   [](const RunConfig& c) { return std::to_string(c.threads); }}},
      {"log_level", {"run", [](RunConfig& c, const std::string& v) { c.log_level = v; },
                     [](const RunConfig& c) { return c.log_level; }}},
  };
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& [k, v] : key_table())
    if (k == name) return &v;
  return nullptr;
}

void materialize(RunConfig& c) {
  const int d = group_dim(c.group);
  if (c.lo.empty()) c.lo.assign(static_cast<std::size_t>(d), 0.0);
  if (c.hi.empty()) c.hi.assign(static_cast<std::size_t>(d), 1.0);
  if (c.nodes.empty()) c.nodes.assign(static_cast<std::size_t>(d), d == 1 ? 512 : (d == 2 ? 65 : 33));
  if (c.nodes.size() == 1 && d > 1) c.nodes.assign(static_cast<std::size_t>(d), c.nodes[0]);
  c.model.epsilon = c.eps0;
}

}  // namespace

void RunConfig::validate() const {
  const auto d = static_cast<std::size_t>(group_dim(group));
  if (lo.size() != d || hi.size() != d || nodes.size() != d)
    throw ConfigError("domain: lo, hi and nodes need " + std::to_string(d) + " entries for group " + to_string(group));
  for (std::size_t a = 0; a < d; ++a) {
    if (!(lo[a] < hi[a])) throw ConfigError("domain: need lo < hi on every axis");
    if (nodes[a] < 3) throw ConfigError("nodes: need at least 3 per axis");
  }
  try {
    model.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (!(eps0 > 0.0 && std::isfinite(eps0))) throw ConfigError("eps0 out of range: need eps0>0");
  if (J < 0 || J > 30) throw ConfigError("J out of range: need 0<=J<=30");
  if (max_iter < 1) throw ConfigError("max_iter out of range: need max_iter>=1");
  if (path_points < 16) throw ConfigError("path_points out of range: need path_points>=16");
  if (mp_max_iter < 1) throw ConfigError("mp_max_iter out of range: need mp_max_iter>=1");
  if (restarts < 8) throw ConfigError("restarts out of range: need restarts>=8");
  if (!(lambda_min > 0.0 && lambda_min < lambda_max)) throw ConfigError("sweep: need 0<lambda_min<lambda_max");
  if (lambda_count < 2) throw ConfigError("lambda_count out of range: need lambda_count>=2");
  if (!(rel_width > 0.0 && rel_width < 1.0)) throw ConfigError("rel_width out of range: need 0<rel_width<1");
  for (double b : betas)
    if (!(b >= 0.0)) throw ConfigError("betas: entries must be >= 0");
  if (threads < 0) throw ConfigError("threads out of range: need threads>=0");
  if (log_level != "info" && log_level != "debug") throw ConfigError("log_level: expected info or debug");
}

std::string RunConfig::to_text() const {
  std::string out;
  std::string section;
  for (const auto& [name, key] : key_table()) {
    if (section != key.section) {
      section = key.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += name + " = " + key.get(*this) + "\n";
  }
  return out;
}

std::string RunConfig::hash() const {
  // output location, worker count and verbosity do not change results
  RunConfig c = *this;
  c.out = "out";
  c.threads = 0;
  c.log_level = "info";
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(c.to_text())));
  return buf;
}

std::vector<double> RunConfig::schedule() const {
  std::vector<double> e;
  for (int j = 0; j <= J; ++j) e.push_back(eps0 * std::ldexp(1.0, -j));
  return e;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  static const char* sections[] = {"domain", "model", "schedule", "solver", "sweep", "run"};
  RunConfig c;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  std::map<std::string, int> seen;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const char* s : sections) known = known || section == s;
      if (!known) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string k = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    const Key* key = find_key(k);
    if (!key) fail("unknown key '" + k + "'");
    if (!section.empty() && section != key->section)
      fail("key '" + k + "' belongs to section [" + key->section + "], not [" + section + "]");
    if (seen.count(k)) fail("duplicate key '" + k + "' (first on line " + std::to_string(seen[k]) + ")");
    seen[k] = lineno;
    try {
      key->set(c, v);
    } catch (const std::exception& e) {
      fail(k + ": " + e.what());
    }
  }
  materialize(c);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace cfbp
