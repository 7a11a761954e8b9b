#include "catsync/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "catsync/errors.hpp"

namespace catsync {

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& msg) {
  std::string where;
  if (n.IsDefined() && n.Mark().line >= 0)
    where = "line " + std::to_string(n.Mark().line + 1) + ": ";
  throw ConfigError(where + field + ": " + msg);
}

template <class T>
T scalar(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) fail(n, field, "expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, field, "cannot read value '" + n.Scalar() + "'");
  }
}

void check_keys(const YAML::Node& map, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!map.IsMap()) fail(map, path, "expected a table");
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, path.empty() ? key : path + "." + key, "unknown field");
  }
}

template <class T>
void read(const YAML::Node& map, const char* key, const std::string& path, T& out) {
  const YAML::Node n = map[key];
  if (n) out = scalar<T>(n, path + "." + key);
}

void positive(const YAML::Node& map, const char* key, const std::string& path, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(map[key], path + "." + key, "must be positive");
}

TrigPoly read_terms(const YAML::Node& n, const std::string& field) {
  if (n.IsNull()) return {};
  if (!n.IsSequence()) fail(n, field, "expected a list of rows [kind, coeff, k1, k2, kw, kt]");
  std::vector<TrigTerm> terms;
  for (std::size_t r = 0; r < n.size(); ++r) {
    const YAML::Node row = n[r];
    const std::string f = field + "[" + std::to_string(r) + "]";
    if (!row.IsSequence() || row.size() != 6)
      fail(row, f, "expected a row [kind, coeff, k1, k2, kw, kt]");
    TrigTerm t;
    const std::string kind = scalar<std::string>(row[0], f + ".kind");
    if (kind == "cos") {
      t.kind = Trig::cos;
    } else if (kind == "sin") {
      t.kind = Trig::sin;
    } else {
      fail(row[0], f + ".kind", "must be cos or sin");
    }
    t.coeff = scalar<double>(row[1], f + ".coeff");
    if (!std::isfinite(t.coeff)) fail(row[1], f + ".coeff", "must be finite");
    int* k[4] = {&t.k.k1, &t.k.k2, &t.k.kw, &t.k.kt};
    for (int c = 0; c < 4; ++c) {
      const YAML::Node v = row[c + 2];
      const std::string name = f + "." + std::string(c == 0 ? "k1" : c == 1 ? "k2" : c == 2 ? "kw" : "kt");
      const double d = scalar<double>(v, name);
      if (d != std::floor(d) || std::abs(d) > 1e6) fail(v, name, "wavevector entries must be integers");
      *k[c] = static_cast<int>(d);
    }
    terms.push_back(t);
  }
  return TrigPoly(terms);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write_terms(std::ostringstream& os, const char* name, const TrigPoly& p) {
  os << "  " << name << ":";
  if (p.terms().empty()) {
    os << " []\n";
    return;
  }
  os << "\n";
  for (const TrigTerm& t : p.terms())
    os << "    - [" << (t.kind == Trig::cos ? "cos" : "sin") << ", " << fmt(t.coeff) << ", "
       << t.k.k1 << ", " << t.k.k2 << ", " << t.k.kw << ", " << t.k.kt << "]\n";
}

nlohmann::json terms_json(const TrigPoly& p) {
  nlohmann::json a = nlohmann::json::array();
  for (const TrigTerm& t : p.terms())
    a.push_back({t.kind == Trig::cos ? "cos" : "sin", t.coeff, t.k.k1, t.k.k2, t.k.kw, t.k.kt});
  return a;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("config: expected a table at top level");
  check_keys(root, "", {"coupling", "grid", "series", "dynamics", "spectrum", "trees", "output"});

  RunConfig c;
  const YAML::Node cp = root["coupling"];
  if (!cp) throw ConfigError("coupling required");
  check_keys(cp, "coupling", {"epsilon", "f1", "f2", "g"});
  read(cp, "epsilon", "coupling", c.coupling.epsilon);
  if (!(c.coupling.epsilon >= 0.0) || !std::isfinite(c.coupling.epsilon))
    fail(cp["epsilon"], "coupling.epsilon", "must be finite and >= 0");
  if (!cp["g"]) fail(cp, "coupling.g", "coupling.g required");
  c.coupling.g = read_terms(cp["g"], "coupling.g");
  if (cp["f1"]) c.coupling.f1 = read_terms(cp["f1"], "coupling.f1");
  if (cp["f2"]) c.coupling.f2 = read_terms(cp["f2"], "coupling.f2");

  if (const YAML::Node g = root["grid"]) {
    check_keys(g, "grid", {"n_phi", "n_t"});
    read(g, "n_phi", "grid", c.n_phi);
    read(g, "n_t", "grid", c.n_t);
    if (c.n_phi < 2) fail(g["n_phi"], "grid.n_phi", "must be >= 2");
    if (c.n_t < 2 || c.n_t % 2) fail(g["n_t"], "grid.n_t", "must be a positive even number");
  }
  if (const YAML::Node s = root["series"]) {
    check_keys(s, "series", {"n_max", "m_sum"});
    read(s, "n_max", "series", c.n_max);
    read(s, "m_sum", "series", c.m_sum);
    if (c.n_max < 1) fail(s["n_max"], "series.n_max", "must be >= 1");
    if (c.m_sum < 1) fail(s["m_sum"], "series.m_sum", "must be >= 1");
  }
  if (const YAML::Node d = root["dynamics"]) {
    check_keys(d, "dynamics", {"dt", "n_iter", "n_transient", "seed", "n_points"});
    read(d, "dt", "dynamics", c.dt);
    positive(d, "dt", "dynamics", c.dt);
    read(d, "n_iter", "dynamics", c.n_iter);
    read(d, "n_transient", "dynamics", c.n_transient);
    read(d, "seed", "dynamics", c.seed);
    read(d, "n_points", "dynamics", c.n_points);
    if (c.n_iter < 1) fail(d["n_iter"], "dynamics.n_iter", "must be >= 1");
    if (c.n_transient < 0) fail(d["n_transient"], "dynamics.n_transient", "must be >= 0");
    if (c.n_points < 0) fail(d["n_points"], "dynamics.n_points", "must be >= 0");
  }
  if (const YAML::Node s = root["spectrum"]) {
    check_keys(s, "spectrum", {"method", "sweep", "find_epsilon_c", "tol"});
    read(s, "method", "spectrum", c.method);
    if (c.method != "qr_direct" && c.method != "perturbative" &&
        c.method != "birkhoff_multiplier" && c.method != "both")
      fail(s["method"], "spectrum.method",
           "must be qr_direct, perturbative, birkhoff_multiplier or both");
    if (const YAML::Node sw = s["sweep"]) {
      if (sw.IsSequence()) {
        for (std::size_t k = 0; k < sw.size(); ++k)
          c.sweep.push_back(scalar<double>(sw[k], "spectrum.sweep[" + std::to_string(k) + "]"));
      } else if (sw.IsMap()) {
        check_keys(sw, "spectrum.sweep", {"from", "to", "count"});
        double from = 0, to = 0;
        int count = 0;
        read(sw, "from", "spectrum.sweep", from);
        read(sw, "to", "spectrum.sweep", to);
        read(sw, "count", "spectrum.sweep", count);
        if (count < 2 || !(to > from)) fail(sw, "spectrum.sweep", "need count >= 2 and to > from");
        for (int k = 0; k < count; ++k) c.sweep.push_back(from + (to - from) * k / (count - 1));
      } else {
        fail(sw, "spectrum.sweep", "expected a list or {from, to, count}");
      }
      for (std::size_t k = 0; k < c.sweep.size(); ++k)
        if (!(c.sweep[k] >= 0.0) || (k && c.sweep[k] <= c.sweep[k - 1]))
          fail(sw, "spectrum.sweep", "values must be >= 0 and strictly increasing");
    }
    read(s, "find_epsilon_c", "spectrum", c.find_epsilon_c);
    read(s, "tol", "spectrum", c.tol);
    positive(s, "tol", "spectrum", c.tol);
  }
  if (const YAML::Node t = root["trees"]) {
    check_keys(t, "trees", {"n_max", "n_enum_max", "render", "verify"});
    read(t, "n_max", "trees", c.trees_n_max);
    read(t, "n_enum_max", "trees", c.n_enum_max);
    read(t, "render", "trees", c.render);
    read(t, "verify", "trees", c.verify_trees);
    if (c.trees_n_max < 1) fail(t["n_max"], "trees.n_max", "must be >= 1");
  }
  if (const YAML::Node o = root["output"]) {
    check_keys(o, "output", {"dir"});
    read(o, "dir", "output", c.output_dir);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string write_config(const RunConfig& c) {
  std::ostringstream os;
  os << "coupling:\n  epsilon: " << fmt(c.coupling.epsilon) << "\n";
  write_terms(os, "f1", c.coupling.f1);
  write_terms(os, "f2", c.coupling.f2);
  write_terms(os, "g", c.coupling.g);
  os << "grid:\n  n_phi: " << c.n_phi << "\n  n_t: " << c.n_t << "\n";
  os << "series:\n  n_max: " << c.n_max << "\n  m_sum: " << c.m_sum << "\n";
  os << "dynamics:\n  dt: " << fmt(c.dt) << "\n  n_iter: " << c.n_iter
     << "\n  n_transient: " << c.n_transient << "\n  seed: " << c.seed
     << "\n  n_points: " << c.n_points << "\n";
  os << "spectrum:\n  method: " << c.method << "\n  sweep: [";
  for (std::size_t k = 0; k < c.sweep.size(); ++k) os << (k ? ", " : "") << fmt(c.sweep[k]);
  os << "]\n  find_epsilon_c: " << (c.find_epsilon_c ? "true" : "false")
     << "\n  tol: " << fmt(c.tol) << "\n";
  os << "trees:\n  n_max: " << c.trees_n_max << "\n  n_enum_max: " << c.n_enum_max
     << "\n  render: " << (c.render ? "true" : "false")
     << "\n  verify: " << (c.verify_trees ? "true" : "false") << "\n";
  os << "output:\n  dir: \"" << c.output_dir << "\"\n";
  return os.str();
}

std::string canonical_config(const RunConfig& c) {
  nlohmann::json j;  // std::map-backed: keys sorted
  j["coupling"] = {{"epsilon", c.coupling.epsilon},
                   {"f1", terms_json(c.coupling.f1)},
                   {"f2", terms_json(c.coupling.f2)},
                   {"g", terms_json(c.coupling.g)}};
  j["grid"] = {{"n_phi", c.n_phi}, {"n_t", c.n_t}};
  j["series"] = {{"n_max", c.n_max}, {"m_sum", c.m_sum}};
  j["dynamics"] = {{"dt", c.dt},         {"n_iter", c.n_iter},     {"n_transient", c.n_transient},
                   {"seed", c.seed},     {"n_points", c.n_points}};
  j["spectrum"] = {{"method", c.method},
                   {"sweep", c.sweep},
                   {"find_epsilon_c", c.find_epsilon_c},
                   {"tol", c.tol}};
  j["trees"] = {{"n_max", c.trees_n_max},
                {"n_enum_max", c.n_enum_max},
                {"render", c.render},
                {"verify", c.verify_trees}};
  return j.dump();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string config_hash(const RunConfig& c) { return sha256_hex(canonical_config(c)); }

}  // namespace catsync
