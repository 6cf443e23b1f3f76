#include "activeflow/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "activeflow/dynamics.hpp"
#include "activeflow/error.hpp"

namespace activeflow {
namespace {

using nlohmann::json;

constexpr double kAutoDtFloor = 1e-5;

[[noreturn]] void parse_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ParseError, "field '" + field + "': " + what);
}

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ValidationError, "field '" + field + "': " + what);
}

// Typed access to one JSON object, tracking the dotted path for messages.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) parse_fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!allowed.count(it.key())) invalid(field(it.key()), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) const {
    if (!j_.contains(key)) invalid(field(key), "missing required key");
    return j_.at(key);
  }

  double number(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number()) parse_fail(field(key), "expected a number, got " + std::string(v.type_name()));
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(field(key), "must be finite");
    return d;
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) {
      parse_fail(field(key), "expected an integer, got " + std::string(v.type_name()));
    }
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const char* key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) parse_fail(field(key), "expected a boolean");
    return v.get<bool>();
  }

  std::string string(const char* key) const {
    const json& v = raw(key);
    if (!v.is_string()) parse_fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  ObjectReader child(const char* key) const { return ObjectReader(raw(key), field(key)); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
};

InitialDataSpec read_initial(const ObjectReader& r) {
  const std::string kind = r.string("kind");
  if (kind == "constant") {
    r.allow_only({"kind", "mass"});
    return ConstantData{r.number("mass")};
  }
  if (kind == "single_mode") {
    r.allow_only({"kind", "mass", "amplitude", "mode"});
    SingleModeData d;
    d.mass = r.number("mass");
    d.amplitude = r.number("amplitude");
    const json& m = r.raw("mode");
    if (!m.is_array() || m.size() != 3) parse_fail(r.field("mode"), "expected three integers");
    for (std::size_t i = 0; i < 3; ++i) {
      if (!m[i].is_number_integer()) parse_fail(r.field("mode"), "expected three integers");
      d.mode[i] = m[i].get<int>();
    }
    return d;
  }
  if (kind == "random_bandlimited") {
    r.allow_only({"kind", "mass", "amplitude", "max_mode", "seed"});
    RandomBandlimitedData d;
    d.mass = r.number("mass");
    d.amplitude = r.number("amplitude");
    d.max_mode = static_cast<int>(r.integer("max_mode"));
    const std::int64_t seed = r.integer("seed", 0);
    if (seed < 0) invalid(r.field("seed"), "must be non-negative");
    d.seed = static_cast<std::uint64_t>(seed);
    return d;
  }
  invalid(r.field("kind"), "unknown initial data kind '" + kind + "'");
}

json initial_json(const InitialDataSpec& spec) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantData>) {
          return {{"kind", "constant"}, {"mass", d.mass}};
        } else if constexpr (std::is_same_v<T, SingleModeData>) {
          return {{"kind", "single_mode"},
                  {"mass", d.mass},
                  {"amplitude", d.amplitude},
                  {"mode", {d.mode[0], d.mode[1], d.mode[2]}}};
        } else {
          return {{"kind", "random_bandlimited"},
                  {"mass", d.mass},
                  {"amplitude", d.amplitude},
                  {"max_mode", d.max_mode},
                  {"seed", d.seed}};
        }
      },
      spec);
}

json params_json(const Params& p) {
  return {{"pe", p.pe}, {"de", p.de}, {"dt", p.dt}, {"dealias", p.dealias}};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw Error(ErrorKind::ParseError, "invalid JSON at line " + std::to_string(line) + ": " + e.what());
  }

  const ObjectReader root(doc, "");
  root.allow_only({"grid", "params", "initial", "t_end", "snapshot_stride", "output_dir",
                   "diagnostics", "checkpoint_every", "resume", "stationary", "verify"});
  RunConfig cfg;

  const ObjectReader grid = root.child("grid");
  grid.allow_only({"n_x", "n_theta"});
  const std::int64_t nx = grid.integer("n_x"), nt = grid.integer("n_theta");
  if (nx < 4 || nx % 2 != 0) invalid("grid.n_x", "must be even and at least 4");
  if (nt < 4 || nt % 2 != 0) invalid("grid.n_theta", "must be even and at least 4");
  cfg.n_x = static_cast<int>(nx);
  cfg.n_theta = static_cast<int>(nt);

  const ObjectReader params = root.child("params");
  params.allow_only({"pe", "de", "dt", "dealias"});
  cfg.params.pe = params.number("pe");
  cfg.params.de = params.number("de");
  if (cfg.params.de <= 0.0) invalid("params.de", "must be positive");
  cfg.params.dealias = params.boolean("dealias", true);
  if (!params.has("dt") || (params.raw("dt").is_string() && params.string("dt") == "auto")) {
    cfg.dt_auto = true;
  } else {
    cfg.params.dt = params.number("dt");
    if (cfg.params.dt <= 0.0) invalid("params.dt", "must be positive or \"auto\"");
  }

  cfg.initial = read_initial(root.child("initial"));
  cfg.t_end = root.number("t_end");
  if (cfg.t_end < 0.0) invalid("t_end", "must be non-negative");

  const std::int64_t stride = root.integer("snapshot_stride", 10);
  if (stride < 1) invalid("snapshot_stride", "must be positive");
  cfg.snapshot_stride = static_cast<std::size_t>(stride);
  if (root.has("output_dir")) cfg.output_dir = root.string("output_dir");

  if (root.has("diagnostics")) {
    const ObjectReader d = root.child("diagnostics");
    d.allow_only({"k_max", "tail_threshold", "truncation"});
    cfg.diagnostics.k_max = static_cast<int>(d.integer("k_max", 6));
    if (cfg.diagnostics.k_max < 0 || cfg.diagnostics.k_max > 10) {
      invalid("diagnostics.k_max", "must lie in [0, 10]");
    }
    cfg.diagnostics.tail_threshold = d.number("tail_threshold", 0.25);
    if (!(cfg.diagnostics.tail_threshold > 0.0 && cfg.diagnostics.tail_threshold < 0.5)) {
      invalid("diagnostics.tail_threshold", "must lie in (0, 0.5)");
    }
    if (d.has("truncation")) {
      const ObjectReader tr = d.child("truncation");
      tr.allow_only({"window", "k_max"});
      cfg.diagnostics.truncation.k_max = static_cast<int>(tr.integer("k_max", 6));
      if (cfg.diagnostics.truncation.k_max < 0) invalid("diagnostics.truncation.k_max", "must be >= 0");
      if (tr.has("window")) {
        const json& w = tr.raw("window");
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
          parse_fail("diagnostics.truncation.window", "expected [t_a, t_b]");
        }
        const double ta = w[0].get<double>(), tb = w[1].get<double>();
        if (!(tb > ta) || ta < 0.0) invalid("diagnostics.truncation.window", "need 0 <= t_a < t_b");
        cfg.diagnostics.truncation.window = std::make_pair(ta, tb);
      }
    }
  }

  cfg.checkpoint_every = root.integer("checkpoint_every", 0);
  if (cfg.checkpoint_every < 0) invalid("checkpoint_every", "must be non-negative");
  cfg.resume = root.boolean("resume", false);

  if (root.has("stationary")) {
    const ObjectReader s = root.child("stationary");
    s.allow_only({"tol", "t_max"});
    cfg.stationary.tol = s.number("tol", 1e-8);
    if (cfg.stationary.tol <= 0.0) invalid("stationary.tol", "must be positive");
    if (s.has("t_max")) cfg.stationary.t_max = s.number("t_max");
  }
  if (root.has("verify")) {
    const ObjectReader v = root.child("verify");
    v.allow_only({"checks"});
    if (v.has("checks")) {
      const json& c = v.raw("checks");
      if (!c.is_array()) parse_fail("verify.checks", "expected a list of criterion numbers");
      for (const auto& e : c) {
        if (!e.is_number_integer()) parse_fail("verify.checks", "expected integers");
        const int id = e.get<int>();
        if (id < 1 || id > 10) invalid("verify.checks", "criterion numbers run from 1 to 10");
        cfg.verify.checks.push_back(id);
      }
    }
  }

  if (cfg.dt_auto) {
    const Field3 f0 = make_initial(cfg.initial, cfg.grid());
    double dt = std::max(0.5 * cfl_dt(f0, cfg.params), kAutoDtFloor);
    if (cfg.t_end > 0.0) dt = std::min(dt, std::max(cfg.t_end / 100.0, kAutoDtFloor));
    cfg.params.dt = dt;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::uint64_t config_hash(const RunConfig& c) {
  json j = {{"grid", {{"n_x", c.n_x}, {"n_theta", c.n_theta}}},
            {"params", params_json(c.params)},
            {"initial", initial_json(c.initial)},
            {"snapshot_stride", c.snapshot_stride},
            {"k_max", c.diagnostics.k_max},
            {"tail_threshold", c.diagnostics.tail_threshold}};
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string serialize_initial(const InitialDataSpec& spec) { return initial_json(spec).dump(); }

InitialDataSpec parse_initial(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("invalid initial data JSON: ") + e.what());
  }
  return read_initial(ObjectReader(doc, "initial"));
}

void write_snapshot(const std::filesystem::path& path, const Field3& f,
                    const SnapshotHeader& header) {
  const std::size_t count = f.size();
  json h = {{"format", "activeflow-snapshot"},
            {"version", kSnapshotFormatVersion},
            {"n_x", f.grid().n_x()},
            {"n_theta", f.grid().n_theta()},
            {"time", header.time},
            {"step", header.step},
            {"params", params_json(header.params)},
            {"config_hash", hex64(header.config_hash)},
            {"reference_mean", header.reference_mean},
            {"byte_order", "little-endian"},
            {"element_type", "float64"},
            {"layout", "row-major i1,i2,i_theta"},
            {"payload_bytes", 8 * count}};

  std::vector<std::uint64_t> payload(count);
  for (std::size_t i = 0; i < count; ++i) payload[i] = to_little_endian(std::bit_cast<std::uint64_t>(f[i]));

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    const std::string line = h.dump() + "\n";
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(std::uint64_t)));
    if (!out) throw Error(ErrorKind::IoError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::pair<SnapshotHeader, Field3> read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open snapshot " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "snapshot has no header line");

  json h;
  try {
    h = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("snapshot header: ") + e.what());
  }
  SnapshotHeader header;
  try {
    if (h.at("format") != "activeflow-snapshot" || h.at("version") != kSnapshotFormatVersion ||
        h.at("byte_order") != "little-endian" || h.at("element_type") != "float64") {
      throw Error(ErrorKind::ParseError, "unsupported snapshot format in " + path.string());
    }
    header.n_x = h.at("n_x").get<int>();
    header.n_theta = h.at("n_theta").get<int>();
    header.time = h.at("time").get<double>();
    header.step = h.at("step").get<std::int64_t>();
    const json& p = h.at("params");
    header.params.pe = p.at("pe").get<double>();
    header.params.de = p.at("de").get<double>();
    header.params.dt = p.at("dt").get<double>();
    header.params.dealias = p.at("dealias").get<bool>();
    header.config_hash = std::stoull(h.at("config_hash").get<std::string>(), nullptr, 16);
    header.reference_mean = h.at("reference_mean").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("snapshot header: ") + e.what());
  }

  const GridSpec grid(header.n_x, header.n_theta);
  std::vector<std::uint64_t> payload(grid.size());
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(std::uint64_t)));
  if (in.gcount() != static_cast<std::streamsize>(payload.size() * sizeof(std::uint64_t)) ||
      in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::ParseError, "snapshot payload length does not match its header");
  }
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<double>(to_little_endian(payload[i]));
  }
  return {header, Field3(grid, std::move(values))};
}

std::string csv_header(int k_max) {
  std::string h = "t,mass,l2_to_const,linf,rho_min,rho_max,grad_l2,spectral_tail";
  for (int k = 0; k <= k_max; ++k) h += ",lp_" + std::to_string(k);
  return h;
}

std::string csv_row(const DiagnosticsRecord& r) {
  std::string row = format_double(r.t);
  for (double v : {r.mass, r.l2_to_const, r.linf, r.rho_min, r.rho_max, r.grad_l2, r.spectral_tail}) {
    row += ',';
    row += format_double(v);
  }
  for (double v : r.lp_ladder) {
    row += ',';
    row += format_double(v);
  }
  return row;
}

std::string to_json(const EquilibriumReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j = {{"kappa", num(r.kappa)},
            {"threshold", num(r.threshold)},
            {"is_small_pe", r.is_small_pe},
            {"measured_rate", num(r.measured_rate)},
            {"bound_satisfied", r.bound_satisfied},
            {"pointwise_bound_ok", r.pointwise_bound_ok},
            {"final_l2_to_const", num(r.final_l2_to_const)},
            {"initial_l2_to_const", num(r.initial_l2_to_const)},
            {"mean", num(r.mean)},
            {"poincare_constant", num(r.poincare)}};
  return j.dump(2);
}

}  // namespace activeflow
