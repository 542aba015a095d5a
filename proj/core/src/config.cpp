#include "hetdyn/config.hpp"

#include "hetdyn/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace hetdyn {

std::string_view to_string(ModelKind m) noexcept {
  switch (m) {
    case ModelKind::GrassForest:
      return "GrassForest";
    case ModelKind::SL4:
      return "SL4";
    case ModelKind::Areal:
      return "Areal";
  }
  return "GrassForest";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "GrassForest" || s == "grassforest") return ModelKind::GrassForest;
  if (s == "SL4" || s == "sl4") return ModelKind::SL4;
  if (s == "Areal" || s == "areal") return ModelKind::Areal;
  throw InvalidParameter("unknown model '" + std::string(s) + "'");
}

RunConfig RunConfig::defaults(ModelKind model) {
  RunConfig c;
  c.model = model;
  c.initial.seed = c.seed;
  if (model == ModelKind::Areal) {
    c.grid = {0.0, 40.0, 400};
    c.h = 0.1;
    c.t_end = 200.0;
    c.snapshot_stride = 10;
  }
  return c;
}

void RunConfig::validate() const {
  if (!(grid.x_max > grid.x_min)) throw InvalidParameter("grid requires x_max > x_min");
  if (grid.n < 3) throw InvalidParameter("grid requires at least 3 nodes");
  const double h_max = model == ModelKind::Areal ? 0.2 : 0.1;
  if (!(h > 0.0 && h <= h_max)) {
    throw InvalidParameter("time step must lie in (0, " + std::to_string(h_max) + "]");
  }
  if (!(t_end > 0.0)) throw InvalidParameter("t_end must be positive");
  if (snapshot_stride < 1) throw InvalidParameter("snapshot_stride must be >= 1");
  if (!(noise >= 0.0)) throw InvalidParameter("noise must be >= 0");
  if (output.empty()) throw InvalidParameter("output directory must not be empty");
  sl.validate();
  areal.validate();
  if (model == ModelKind::Areal && areal.use_path &&
      (areal.path.r_lo < grid.x_min || areal.path.r_hi > grid.x_max)) {
    throw InvalidParameter("morphogen region lies outside the grid");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

double parse_real(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw InvalidParameter("expected a real number, got '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(std::string_view s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw InvalidParameter("expected a nonnegative integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "off" || s == "no" || s == "0") return false;
  throw InvalidParameter("expected a boolean, got '" + std::string(s) + "'");
}

std::vector<double> parse_list(std::string_view s, std::size_t count) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_real(trim(s.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (out.size() != count) {
    throw InvalidParameter("expected " + std::to_string(count) +
                           " comma-separated reals");
  }
  return out;
}

enum class Bound { Any, NonNegative, Positive };

void check(double v, Bound b) {
  if (!std::isfinite(v)) throw InvalidParameter("value must be finite");
  if (b == Bound::NonNegative && v < 0.0) throw InvalidParameter("value must be >= 0");
  if (b == Bound::Positive && !(v > 0.0)) throw InvalidParameter("value must be > 0");
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Access>
Key real_key(std::string section, std::string name, Access access,
             Bound bound = Bound::Any) {
  return {std::move(section), std::move(name),
          [access, bound](RunConfig& c, std::string_view v) {
            const double x = parse_real(v);
            check(x, bound);
            access(c) = x;
          },
          [access](const RunConfig& c) {
            return format_real(access(const_cast<RunConfig&>(c)));
          }};
}

template <class Access>
Key unsigned_key(std::string section, std::string name, Access access) {
  return {std::move(section), std::move(name),
          [access](RunConfig& c, std::string_view v) {
            access(c) = static_cast<std::remove_reference_t<decltype(access(c))>>(
                parse_unsigned(v));
          },
          [access](const RunConfig& c) {
            return std::to_string(access(const_cast<RunConfig&>(c)));
          }};
}

template <class Access>
Key bool_key(std::string section, std::string name, Access access) {
  return {std::move(section), std::move(name),
          [access](RunConfig& c, std::string_view v) { access(c) = parse_bool(v); },
          [access](const RunConfig& c) {
            return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false");
          }};
}

template <std::size_t N, class Access>
Key list_key(std::string section, std::string name, Access access, Bound bound) {
  return {std::move(section), std::move(name),
          [access, bound](RunConfig& c, std::string_view v) {
            const auto xs = parse_list(v, N);
            for (double x : xs) check(x, bound);
            auto& target = access(c);
            if constexpr (N == 2) {
              target = {xs[0], xs[1]};
            } else {
              std::copy(xs.begin(), xs.end(), target.begin());
            }
          },
          [access](const RunConfig& c) {
            const auto& t = access(const_cast<RunConfig&>(c));
            std::string out;
            if constexpr (N == 2) {
              out = format_real(t.first) + ", " + format_real(t.second);
            } else {
              for (std::size_t i = 0; i < N; ++i) {
                if (i) out += ", ";
                out += format_real(t[i]);
              }
            }
            return out;
          }};
}

void add_sigmoid(std::vector<Key>& keys, const std::string& prefix,
                 SigmoidResponse& (*access)(RunConfig&)) {
  keys.push_back(real_key("sl", prefix + "_lo",
                          [access](RunConfig& c) -> double& { return access(c).lo; }));
  keys.push_back(real_key("sl", prefix + "_hi",
                          [access](RunConfig& c) -> double& { return access(c).hi; }));
  keys.push_back(real_key("sl", prefix + "_threshold", [access](RunConfig& c) -> double& {
    return access(c).threshold;
  }));
  keys.push_back(real_key(
      "sl", prefix + "_steepness",
      [access](RunConfig& c) -> double& { return access(c).steepness; },
      Bound::Positive));
}

void add_gradient(std::vector<Key>& keys, const std::string& section,
                  SpatialGradient& (*access)(RunConfig&)) {
  keys.push_back(real_key(section, "intercept", [access](RunConfig& c) -> double& {
    return access(c).intercept;
  }));
  keys.push_back(real_key(section, "slope", [access](RunConfig& c) -> double& {
    return access(c).slope;
  }));
  keys.push_back({section, "shape",
                  [access](RunConfig& c, std::string_view v) {
                    access(c).shape = gradient_shape_from_string(v);
                  },
                  [access](const RunConfig& c) {
                    return std::string(to_string(access(const_cast<RunConfig&>(c)).shape));
                  }});
  keys.push_back(real_key(
      section, "shape_param",
      [access](RunConfig& c) -> double& { return access(c).shape_param; },
      Bound::Positive));
  keys.push_back(real_key(
      section, "noise_amplitude",
      [access](RunConfig& c) -> double& { return access(c).noise_amplitude; },
      Bound::NonNegative));
  keys.push_back(unsigned_key(section, "noise_seed", [access](RunConfig& c) -> auto& {
    return access(c).noise_seed;
  }));
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back({"run", "model",
                 [](RunConfig& c, std::string_view v) { c.model = model_kind_from_string(v); },
                 [](const RunConfig& c) { return std::string(to_string(c.model)); }});
    k.push_back(real_key("run", "h", [](RunConfig& c) -> double& { return c.h; },
                         Bound::Positive));
    k.push_back(real_key("run", "t_end", [](RunConfig& c) -> double& { return c.t_end; },
                         Bound::Positive));
    k.push_back(unsigned_key("run", "snapshot_stride",
                             [](RunConfig& c) -> auto& { return c.snapshot_stride; }));
    k.push_back(unsigned_key("run", "seed", [](RunConfig& c) -> auto& { return c.seed; }));
    k.push_back({"run", "output",
                 [](RunConfig& c, std::string_view v) { c.output = std::string(v); },
                 [](const RunConfig& c) { return c.output; }});

    k.push_back(real_key("grid", "x_min", [](RunConfig& c) -> double& { return c.grid.x_min; }));
    k.push_back(real_key("grid", "x_max", [](RunConfig& c) -> double& { return c.grid.x_max; }));
    k.push_back(unsigned_key("grid", "n", [](RunConfig& c) -> auto& { return c.grid.n; }));

    k.push_back(real_key("kernels", "sigma_F",
                         [](RunConfig& c) -> double& { return c.sl.sigma_F; }, Bound::Positive));
    k.push_back(real_key("kernels", "sigma_T",
                         [](RunConfig& c) -> double& { return c.sl.sigma_T; }, Bound::Positive));
    k.push_back(real_key("kernels", "sigma_W",
                         [](RunConfig& c) -> double& { return c.sl.sigma_W; }, Bound::Positive));
    k.push_back({"kernels", "bc",
                 [](RunConfig& c, std::string_view v) {
                   c.sl.bc = boundary_condition_from_string(v);
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.sl.bc)); }});
    k.push_back(bool_key("kernels", "normalize",
                         [](RunConfig& c) -> bool& { return c.sl.normalize_kernels; }));

    k.push_back(real_key("sl", "mu", [](RunConfig& c) -> double& { return c.sl.mu; },
                         Bound::NonNegative));
    k.push_back(real_key("sl", "nu", [](RunConfig& c) -> double& { return c.sl.nu; },
                         Bound::NonNegative));
    add_sigmoid(k, "omega", [](RunConfig& c) -> SigmoidResponse& { return c.sl.omega; });
    add_sigmoid(k, "phi", [](RunConfig& c) -> SigmoidResponse& { return c.sl.phi; });
    add_gradient(k, "gradient.alpha",
                 [](RunConfig& c) -> SpatialGradient& { return c.sl.alpha; });
    add_gradient(k, "gradient.beta",
                 [](RunConfig& c) -> SpatialGradient& { return c.sl.beta; });

    k.push_back({"initial", "kind",
                 [](RunConfig& c, std::string_view v) {
                   c.initial.kind = initial_kind_from_string(v);
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.initial.kind)); }});
    k.push_back(list_key<4>("initial", "left",
                            [](RunConfig& c) -> auto& { return c.initial.left; },
                            Bound::NonNegative));
    k.push_back(list_key<4>("initial", "right",
                            [](RunConfig& c) -> auto& { return c.initial.right; },
                            Bound::NonNegative));
    k.push_back(real_key("initial", "location",
                         [](RunConfig& c) -> double& { return c.initial.location; }));
    k.push_back(real_key("initial", "width",
                         [](RunConfig& c) -> double& { return c.initial.width; },
                         Bound::NonNegative));
    k.push_back(real_key("initial", "amplitude",
                         [](RunConfig& c) -> double& { return c.initial.amplitude; },
                         Bound::NonNegative));

    auto areal = [&k](const char* name, double ArealParams::*m, Bound b) {
      k.push_back(real_key("areal", name,
                           [m](RunConfig& c) -> double& { return c.areal.*m; }, b));
    };
    areal("k1", &ArealParams::k1, Bound::NonNegative);
    areal("k2", &ArealParams::k2, Bound::NonNegative);
    areal("D_E", &ArealParams::D_E, Bound::NonNegative);
    areal("D_CE", &ArealParams::D_CE, Bound::NonNegative);
    areal("D_N", &ArealParams::D_N, Bound::NonNegative);
    areal("D_CN", &ArealParams::D_CN, Bound::NonNegative);
    areal("chi1", &ArealParams::chi1, Bound::NonNegative);
    areal("chi2", &ArealParams::chi2, Bound::NonNegative);
    areal("alpha_sat", &ArealParams::alpha_sat, Bound::Positive);
    k.push_back(list_key<2>("areal", "morphogens",
                            [](RunConfig& c) -> auto& { return c.areal.morphogens; },
                            Bound::NonNegative));
    k.push_back(bool_key("areal", "use_path",
                         [](RunConfig& c) -> bool& { return c.areal.use_path; }));
    k.push_back(list_key<2>("areal", "p1",
                            [](RunConfig& c) -> auto& { return c.areal.path.p1; },
                            Bound::NonNegative));
    k.push_back(list_key<2>("areal", "p2",
                            [](RunConfig& c) -> auto& { return c.areal.path.p2; },
                            Bound::NonNegative));
    k.push_back(real_key("areal", "r_lo", [](RunConfig& c) -> double& {
      return c.areal.path.r_lo;
    }));
    k.push_back(real_key("areal", "r_hi", [](RunConfig& c) -> double& {
      return c.areal.path.r_hi;
    }));
    k.push_back(real_key("areal", "noise", [](RunConfig& c) -> double& { return c.noise; },
                         Bound::NonNegative));
    return k;
  }();
  return keys;
}

const Key* find_key(std::string_view section, std::string_view name) {
  for (const auto& k : registry()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

struct Entry {
  int line;
  std::string section;
  std::string key;
  std::string value;
};

}  // namespace

RunConfig parse_config(std::string_view text) {
  std::vector<Entry> entries;
  std::string section = "run";
  std::map<std::pair<std::string, std::string>, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) {
      line = line.substr(0, c);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no, "");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ParseError("empty section name", line_no, "");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("expected 'key = value'", line_no, std::string(line));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    const std::string qualified = section + "." + key;
    if (key.empty()) throw ParseError("missing key", line_no, "");
    if (!find_key(section, key)) {
      throw ParseError("unknown key '" + qualified + "'", line_no, qualified);
    }
    if (value.empty()) throw ParseError("missing value for '" + qualified + "'", line_no, qualified);
    if (auto [it, fresh] = seen.emplace(std::make_pair(section, key), line_no); !fresh) {
      throw ParseError("duplicate key '" + qualified + "' (first on line " +
                           std::to_string(it->second) + ")",
                       line_no, qualified);
    }
    entries.push_back({line_no, section, key, value});
  }

  auto apply = [](RunConfig& c, const Entry& e) {
    try {
      find_key(e.section, e.key)->set(c, e.value);
    } catch (const Error& err) {
      throw ParseError(e.section + "." + e.key + ": " + err.what(), e.line,
                       e.section + "." + e.key);
    }
  };

  RunConfig probe;
  for (const auto& e : entries) {
    if (e.section == "run" && e.key == "model") apply(probe, e);
  }
  RunConfig config = RunConfig::defaults(probe.model);
  for (const auto& e : entries) apply(config, e);
  config.initial.seed = config.seed;
  try {
    config.validate();
  } catch (const Error& err) {
    throw ParseError(std::string("invalid configuration: ") + err.what(), 0, "");
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& k : registry()) {
    if (k.section != section) {
      section = k.section;
      if (!out.empty()) out += '\n';
      out += "[" + section + "]\n";
    }
    out += k.name + " = " + k.get(config) + "\n";
  }
  return out;
}

}  // namespace hetdyn
