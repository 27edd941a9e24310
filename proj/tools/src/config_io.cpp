#include "edgeprice/cli/config_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <toml++/toml.hpp>

#include "edgeprice/errors.hpp"

namespace edgeprice::cli {

using nlohmann::json;

namespace {

json toml_to_json(const toml::node& node, const std::string& path,
                  std::map<std::string, int>& lines) {
  if (!path.empty()) lines[path] = static_cast<int>(node.source().begin.line);
  if (const auto* table = node.as_table()) {
    json obj = json::object();
    for (auto&& [key, value] : *table) {
      const std::string k(key.str());
      obj[k] = toml_to_json(value, path.empty() ? k : path + "." + k, lines);
    }
    return obj;
  }
  if (const auto* array = node.as_array()) {
    json arr = json::array();
    for (std::size_t i = 0; i < array->size(); ++i) {
      arr.push_back(toml_to_json(*array->get(i), path + "[" + std::to_string(i) + "]", lines));
    }
    return arr;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  std::ostringstream msg;
  msg << "line " << node.source().begin.line << ": field '" << path
      << "': dates and times are not supported";
  throw ConfigParseError(msg.str());
}

// Field access with "<source>:<line>: field '<path>': ..." diagnostics.
class Reader {
 public:
  explicit Reader(const ConfigDocument& doc) : doc_(doc) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    std::string where = doc_.source_name;
    // Fall back to the closest enclosing path that has a line.
    for (std::string p = path; !p.empty();) {
      if (auto it = doc_.lines.find(p); it != doc_.lines.end()) {
        where += ":" + std::to_string(it->second);
        break;
      }
      const auto cut = p.find_last_of(".[");
      p = cut == std::string::npos ? std::string() : p.substr(0, cut);
    }
    throw ConfigParseError(where + ": field '" + path + "': " + message);
  }

  static std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
  }

  void reject_unknown(const json& obj, const std::string& path,
                      std::initializer_list<std::string_view> known) const {
    for (const auto& [key, value] : obj.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        fail(join(path, key), "unknown field");
      }
    }
  }

  const json* find(const json& obj, const std::string& key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  const json& require(const json& obj, const std::string& parent,
                      const std::string& key) const {
    const json* v = find(obj, key);
    if (!v) fail(join(parent, key), "required field is missing");
    return *v;
  }

  std::int64_t integer(const json& v, const std::string& path) const {
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(INT64_MAX)) fail(path, "integer out of range");
      return static_cast<std::int64_t>(u);
    }
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
  }

  int small_int(const json& v, const std::string& path) const {
    const auto x = integer(v, path);
    if (x < INT32_MIN || x > INT32_MAX) fail(path, "integer out of range");
    return static_cast<int>(x);
  }

  std::uint64_t seed(const json& v, const std::string& path) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    fail(path, "expected a non-negative integer");
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::string string(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  const json& table(const json& v, const std::string& path) const {
    if (!v.is_object()) fail(path, "expected a table");
    return v;
  }

 private:
  const ConfigDocument& doc_;
};

template <typename Fn>
auto with_path(const Reader& r, const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    r.fail(path, e.what());
  }
}

ValuationModel read_valuation(const Reader& r, const json& v) {
  const std::string path = "valuation";
  r.table(v, path);
  const std::string kind_name = r.string(r.require(v, path, "kind"), "valuation.kind");
  const auto kind = parse_valuation_kind(kind_name);
  if (!kind) {
    r.fail("valuation.kind", "unknown valuation kind '" + kind_name +
                                 "' (uniform, truncated_gaussian, "
                                 "truncated_exponential, bernoulli)");
  }
  switch (*kind) {
    case ValuationKind::uniform:
      r.reject_unknown(v, path, {"kind"});
      return ValuationModel::uniform();
    case ValuationKind::truncated_gaussian: {
      r.reject_unknown(v, path, {"kind", "mean", "std"});
      const double mean = r.number(r.require(v, path, "mean"), "valuation.mean");
      const double sd = r.number(r.require(v, path, "std"), "valuation.std");
      return with_path(r, path, [&] { return ValuationModel::truncated_gaussian(mean, sd); });
    }
    case ValuationKind::truncated_exponential: {
      r.reject_unknown(v, path, {"kind", "mean"});
      const double mean = r.number(r.require(v, path, "mean"), "valuation.mean");
      return with_path(r, path, [&] { return ValuationModel::truncated_exponential(mean); });
    }
    case ValuationKind::bernoulli: {
      r.reject_unknown(v, path, {"kind", "probability"});
      const json& p = r.require(v, path, "probability");
      std::vector<double> probs = p.is_array()
                                      ? r.numbers(p, "valuation.probability")
                                      : std::vector<double>{r.number(p, "valuation.probability")};
      return with_path(r, "valuation.probability",
                       [&] { return ValuationModel::bernoulli(std::move(probs)); });
    }
  }
  r.fail(path, "unsupported valuation kind");
}

MarketSetup read_market(const Reader& r, const json* market, const json* valuation,
                        std::uint64_t default_seed) {
  MarketSetup m;
  const json empty = json::object();
  const json& t = market ? r.table(*market, "market") : empty;
  r.reject_unknown(t, "market", {"vm_types", "edge_nodes", "price_levels", "arm_scheme",
                                 "num_arms", "arm_seed", "capacity"});
  const int vm_types = t.contains("vm_types") ? r.small_int(t["vm_types"], "market.vm_types") : 1;
  const int edge_nodes =
      t.contains("edge_nodes") ? r.small_int(t["edge_nodes"], "market.edge_nodes") : 1;
  m.grid = with_path(r, "market", [&] { return ProductGrid(vm_types, edge_nodes); });

  if (const json* lv = r.find(t, "price_levels")) {
    if (lv->is_array()) {
      auto values = r.numbers(*lv, "market.price_levels");
      m.levels = with_path(r, "market.price_levels",
                           [&] { return PriceLevels(std::move(values)); });
    } else {
      const int count = r.small_int(*lv, "market.price_levels");
      m.levels = with_path(r, "market.price_levels",
                           [&] { return PriceLevels::evenly_spaced(count); });
    }
  }
  if (const json* s = r.find(t, "arm_scheme")) {
    const auto name = r.string(*s, "market.arm_scheme");
    const auto scheme = parse_arm_scheme(name);
    if (!scheme) {
      r.fail("market.arm_scheme",
             "unknown arm scheme '" + name + "' (uniform_ladder, random_grid)");
    }
    m.scheme = *scheme;
  }
  m.num_arms = t.contains("num_arms") ? r.small_int(t["num_arms"], "market.num_arms")
                                      : static_cast<int>(m.levels.size());
  m.arm_seed = t.contains("arm_seed") ? r.seed(t["arm_seed"], "market.arm_seed") : default_seed;

  if (const json* cap = r.find(t, "capacity")) {
    const std::size_t n = m.grid.num_products();
    std::vector<std::optional<std::int64_t>> caps;
    auto entry = [&](const json& v, const std::string& path) -> std::optional<std::int64_t> {
      const auto x = r.integer(v, path);
      if (x == -1) return std::nullopt;
      if (x < 0) r.fail(path, "capacity must be >= 0, or -1 for unlimited");
      return x;
    };
    if (cap->is_array()) {
      for (std::size_t i = 0; i < cap->size(); ++i) {
        caps.push_back(entry((*cap)[i], "market.capacity[" + std::to_string(i) + "]"));
      }
      if (caps.size() != n) {
        r.fail("market.capacity", "expected " + std::to_string(n) + " entries (one per product)");
      }
    } else {
      caps.assign(n, entry(*cap, "market.capacity"));
    }
    m.capacity = std::move(caps);
  }

  m.valuation = valuation ? read_valuation(r, *valuation) : ValuationModel::uniform();
  with_path(r, "valuation", [&] {
    m.valuation.check_grid(m.grid);
    return 0;
  });
  // Surface the K bound with the field that set it.
  with_path(r, "market.num_arms", [&] {
    build_arm_set(m.grid, m.levels, m.num_arms, m.scheme, m.arm_seed);
    return 0;
  });
  return m;
}

PolicyConfig read_policy(const Reader& r, const json& v, const std::string& path) {
  r.table(v, path);
  r.reject_unknown(v, path, {"kind", "label", "gamma", "epsilon", "divergence", "exploit"});
  PolicyConfig p;
  const auto kind_name = r.string(r.require(v, path, "kind"), path + ".kind");
  const auto kind = parse_policy_kind(kind_name);
  if (!kind) {
    r.fail(path + ".kind", "unknown policy kind '" + kind_name +
                               "' (kl_ucb, moss, ucb, thompson, epsilon_greedy)");
  }
  p.kind = *kind;
  if (const json* x = r.find(v, "label")) p.label = r.string(*x, path + ".label");
  if (const json* x = r.find(v, "gamma")) p.gamma = r.number(*x, path + ".gamma");
  if (const json* x = r.find(v, "epsilon")) p.epsilon = r.number(*x, path + ".epsilon");
  if (const json* x = r.find(v, "divergence")) {
    const auto name = r.string(*x, path + ".divergence");
    const auto d = parse_divergence(name);
    if (!d) r.fail(path + ".divergence", "unknown divergence '" + name + "'");
    p.divergence = *d;
  }
  if (const json* x = r.find(v, "exploit")) {
    const auto name = r.string(*x, path + ".exploit");
    const auto rule = parse_exploit_rule(name);
    if (!rule) r.fail(path + ".exploit", "unknown exploit rule '" + name + "'");
    p.eg_exploit_rule = *rule;
  }
  return p;
}

std::vector<PolicyConfig> default_policies() {
  std::vector<PolicyConfig> out;
  for (auto kind : {PolicyKind::kl_ucb, PolicyKind::moss, PolicyKind::ucb,
                    PolicyKind::thompson, PolicyKind::epsilon_greedy}) {
    PolicyConfig p;
    p.kind = kind;
    p.label = std::string(to_string(kind));
    out.push_back(p);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParseError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ConfigDocument parse_toml_document(std::string_view text, std::string source_name) {
  ConfigDocument doc;
  doc.source_name = std::move(source_name);
  try {
    const toml::table table = toml::parse(text, doc.source_name);
    doc.root = toml_to_json(table, "", doc.lines);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << doc.source_name << ":" << e.source().begin.line << ":"
        << e.source().begin.column << ": " << e.description();
    throw ConfigParseError(msg.str());
  }
  return doc;
}

ConfigDocument parse_json_document(std::string_view text, std::string source_name) {
  ConfigDocument doc;
  doc.source_name = std::move(source_name);
  try {
    doc.root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(doc.source_name + ": " + e.what());
  }
  if (doc.root.is_object() && doc.root.contains("config")) {
    json inner = doc.root["config"];
    doc.root = std::move(inner);
  }
  return doc;
}

ExperimentConfig config_from_document(const ConfigDocument& doc) {
  const Reader r(doc);
  const json& root = doc.root;
  if (!root.is_object()) throw ConfigParseError(doc.source_name + ": config must be a table");
  r.reject_unknown(root, "", {"name", "horizon", "episodes", "seed", "checkpoints", "market",
                              "valuation", "bernoulli_arms", "policy"});

  ExperimentConfig c;
  if (const json* v = r.find(root, "name")) c.name = r.string(*v, "name");
  c.horizon = r.integer(r.require(root, "", "horizon"), "horizon");
  if (c.horizon < 1) r.fail("horizon", "must be a positive integer");
  if (const json* v = r.find(root, "episodes")) {
    c.episodes = r.small_int(*v, "episodes");
    if (c.episodes < 1) r.fail("episodes", "must be at least 1");
  }
  if (const json* v = r.find(root, "seed")) c.master_seed = r.seed(*v, "seed");

  const json* arms = r.find(root, "bernoulli_arms");
  if (arms) {
    if (root.contains("market") || root.contains("valuation")) {
      r.fail("bernoulli_arms", "cannot be combined with [market] or [valuation]");
    }
    r.table(*arms, "bernoulli_arms");
    r.reject_unknown(*arms, "bernoulli_arms", {"means"});
    BernoulliArmsSetup b;
    b.means = r.numbers(r.require(*arms, "bernoulli_arms", "means"), "bernoulli_arms.means");
    if (b.means.empty()) r.fail("bernoulli_arms.means", "needs at least one arm");
    for (std::size_t i = 0; i < b.means.size(); ++i) {
      if (!(b.means[i] >= 0.0 && b.means[i] <= 1.0)) {
        r.fail("bernoulli_arms.means[" + std::to_string(i) + "]", "mean outside [0, 1]");
      }
    }
    c.environment = std::move(b);
  } else {
    c.environment = read_market(r, r.find(root, "market"), r.find(root, "valuation"),
                                c.master_seed);
  }

  if (const json* v = r.find(root, "policy")) {
    if (!v->is_array() || v->empty()) r.fail("policy", "expected a non-empty array of tables");
    for (std::size_t i = 0; i < v->size(); ++i) {
      c.policies.push_back(read_policy(r, (*v)[i], "policy[" + std::to_string(i) + "]"));
    }
  } else {
    c.policies = default_policies();
  }

  if (const json* v = r.find(root, "checkpoints")) {
    if (v->is_string()) {
      c.checkpoints = with_path(r, "checkpoints", [&] {
        return parse_checkpoint_spec(v->get<std::string>(), c.horizon);
      });
    } else if (v->is_array()) {
      for (std::size_t i = 0; i < v->size(); ++i) {
        c.checkpoints.push_back(r.integer((*v)[i], "checkpoints[" + std::to_string(i) + "]"));
      }
    } else {
      r.fail("checkpoints", "expected \"geometric\", \"linear:N\" or an array of rounds");
    }
  }
  if (c.checkpoints.empty()) c.checkpoints = geometric_checkpoints(c.horizon);

  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigParseError(doc.source_name + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto doc = path.extension() == ".json"
                       ? parse_json_document(text, path.string())
                       : parse_toml_document(text, path.string());
  return config_from_document(doc);
}

ExperimentConfig parse_config_toml(std::string_view text, std::string source_name) {
  return config_from_document(parse_toml_document(text, std::move(source_name)));
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["horizon"] = c.horizon;
  j["episodes"] = c.episodes;
  j["seed"] = c.master_seed;
  j["checkpoints"] = c.resolved_checkpoints();
  if (const auto* m = std::get_if<MarketSetup>(&c.environment)) {
    json market;
    market["vm_types"] = m->grid.num_vm_types();
    market["edge_nodes"] = m->grid.num_edge_nodes();
    market["price_levels"] = std::vector<double>(m->levels.values().begin(),
                                                 m->levels.values().end());
    market["arm_scheme"] = std::string(to_string(m->scheme));
    market["num_arms"] = m->num_arms;
    market["arm_seed"] = m->arm_seed;
    if (m->capacity) {
      json caps = json::array();
      for (const auto& x : *m->capacity) caps.push_back(x ? *x : -1);
      market["capacity"] = caps;
    }
    j["market"] = market;
    json val;
    val["kind"] = std::string(to_string(m->valuation.kind()));
    switch (m->valuation.kind()) {
      case ValuationKind::uniform: break;
      case ValuationKind::truncated_gaussian:
        val["mean"] = m->valuation.mean();
        val["std"] = m->valuation.stddev();
        break;
      case ValuationKind::truncated_exponential:
        val["mean"] = m->valuation.mean();
        break;
      case ValuationKind::bernoulli: {
        const auto p = m->valuation.success_probabilities();
        val["probability"] = std::vector<double>(p.begin(), p.end());
        break;
      }
    }
    j["valuation"] = val;
  } else {
    j["bernoulli_arms"]["means"] = std::get<BernoulliArmsSetup>(c.environment).means;
  }
  json policies = json::array();
  for (const auto& p : c.resolved_policies()) {
    policies.push_back({{"kind", std::string(to_string(p.kind))},
                        {"label", p.label},
                        {"gamma", p.gamma},
                        {"epsilon", p.epsilon},
                        {"divergence", std::string(to_string(p.divergence))},
                        {"exploit", std::string(to_string(p.eg_exploit_rule))}});
  }
  j["policy"] = policies;
  return j;
}

std::vector<std::int64_t> parse_checkpoint_spec(std::string_view spec,
                                                std::int64_t horizon) {
  auto parse_int = [](std::string_view s) {
    std::int64_t x = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigError("bad checkpoint value '" + std::string(s) + "'");
    }
    return x;
  };
  if (spec == "geometric") return geometric_checkpoints(horizon);
  std::vector<std::int64_t> out;
  if (spec.starts_with("linear:")) {
    const auto n = parse_int(spec.substr(7));
    if (n < 1) throw ConfigError("linear checkpoint count must be positive");
    for (std::int64_t i = 1; i <= n; ++i) {
      const std::int64_t t = std::max<std::int64_t>(1, horizon * i / n);
      if (out.empty() || t > out.back()) out.push_back(t);
    }
    return out;
  }
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    out.push_back(parse_int(spec.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    spec.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("empty checkpoint list");
  std::int64_t previous = 0;
  for (auto t : out) {
    if (t <= previous || t > horizon) {
      throw ConfigError("checkpoints must be strictly increasing within [1, horizon]");
    }
    previous = t;
  }
  return out;
}

}  // namespace edgeprice::cli
