#include "olp/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace olp {

using nlohmann::json;

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

template <class T>
T get(const json& j, const char* key, T dflt) {
  if (!j.contains(key)) return dflt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("bad value for '") + key + "'");
  }
}

template <class T>
T need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing key '") + key + "'");
  return get<T>(j, key, T{});
}

// JSON has no infinities; "inf" strings stand in for them
double as_real(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw InputError("expected a number");
}

json real(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
  if (!f) throw InputError("write failed for " + path);
}

// ---------------------------------------------------------------- spaces ----

std::string space_to_json(const OuterSpace& space) {
  json j;
  j["cells"] = json::array();
  for (const auto& c : space.cells) j["cells"].push_back({{"id", c.id}, {"coords", c.coords}, {"weight", c.weight}});
  j["gensets"] = json::array();
  for (const auto& g : space.gensets) j["gensets"].push_back({{"id", g.id}, {"members", g.members}, {"sigma", real(g.sigma)}});
  return j.dump() + "\n";
}

OuterSpace space_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object() || !j.contains("cells") || !j.contains("gensets")) throw InputError("space needs cells and gensets");
  OuterSpace s;
  for (const auto& c : j.at("cells")) {
    Cell cell;
    cell.id = need<int>(c, "id");
    cell.coords = get<std::vector<double>>(c, "coords", {});
    cell.weight = get<double>(c, "weight", 1.0);
    if (cell.id != static_cast<int>(s.cells.size())) throw InputError("cell ids must be 0..n-1 in order");
    if (!(cell.weight > 0.0)) throw InputError("cell weights must be positive");
    s.cells.push_back(std::move(cell));
  }
  for (const auto& g : j.at("gensets")) {
    GeneratingSet G;
    G.id = need<int>(g, "id");
    G.members = need<std::vector<int>>(g, "members");
    if (!g.contains("sigma")) throw InputError("genset without sigma");
    G.sigma = as_real(g.at("sigma"));
    if (G.id != static_cast<int>(s.gensets.size())) throw InputError("genset ids must be 0..n-1 in order");
    for (int c : G.members)
      if (c < 0 || c >= static_cast<int>(s.cells.size())) throw InputError("genset member out of range");
    if (!(G.sigma >= 0.0)) throw InputError("sigma must be nonnegative");
    s.gensets.push_back(std::move(G));
  }
  s.finalize();
  return s;
}

std::string slm_to_json(const SuperLevelResult& r) {
  json j;
  j["lambda"] = real(r.lambda);
  j["value"] = real(r.value);
  j["witness"] = r.witness.ids;
  j["status"] = to_string(r.status);
  return j.dump() + "\n";
}

// --------------------------------------------------------------- signals ----

LineSignal signal_from_json(const std::string& text) {
  const json j = parse(text);
  const double x0 = need<double>(j, "x0");
  const double dx = need<double>(j, "dx");
  if (!(dx > 0.0)) throw InputError("dx must be positive");
  LineSignal f;
  if (j.contains("values")) {
    f.x0 = x0;
    f.dx = dx;
    for (const auto& v : j.at("values")) {
      if (v.is_number()) {
        f.v.emplace_back(v.get<double>(), 0.0);
      } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        f.v.emplace_back(v[0].get<double>(), v[1].get<double>());
      } else {
        throw InputError("signal values must be numbers or [re, im] pairs");
      }
    }
    if (f.v.empty()) throw InputError("empty signal");
    return f;
  }
  if (j.contains("family")) {
    const auto& fj = j.at("family");
    SignalFamily fam;
    fam.kind = parse_signal_kind(need<std::string>(fj, "kind"));
    fam.seed = get<std::uint64_t>(fj, "seed", 1);
    fam.extent = get<double>(fj, "extent", 4.0);
    fam.real = get<bool>(fj, "real", true);
    const int idx = get<int>(fj, "index", 0);
    if (idx < 0) throw InputError("family index must be nonnegative");
    fam.count = idx + 1;
    const auto n = need<std::size_t>(j, "n");
    if (n == 0) throw InputError("n must be positive");
    return LineSignal::sample(x0, dx, n, generate_signals(fam)[idx]);
  }
  throw InputError("signal needs 'values' or 'family'");
}

std::string signal_to_json(const LineSignal& f) {
  json j;
  j["x0"] = f.x0;
  j["dx"] = f.dx;
  j["values"] = json::array();
  for (const auto& z : f.v) j["values"].push_back({z.real(), z.imag()});
  return j.dump() + "\n";
}

// ----------------------------------------------------------------- grids ----

UpperHalfPlaneGrid half_plane_grid_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object()) throw InputError("grid must be an object");
  UpperHalfPlaneGrid g;
  g.Y = get<double>(j, "Y", g.Y);
  g.dy = get<double>(j, "dy", g.dy);
  g.levels = get<int>(j, "levels", g.levels);
  g.t_max = get<double>(j, "t_max", g.t_max);
  g.per_octave = get<int>(j, "per_octave", g.per_octave);
  g.validate();
  return g;
}

Upper3Grid upper3_grid_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object()) throw InputError("grid must be an object");
  Upper3Grid g;
  g.Y = get<double>(j, "Y", g.Y);
  g.dy = get<double>(j, "dy", g.dy);
  g.eta0 = get<double>(j, "eta0", g.eta0);
  g.H = get<double>(j, "H", g.H);
  g.deta = get<double>(j, "deta", g.deta);
  g.kmin = get<int>(j, "kmin", g.kmin);
  g.kmax = get<int>(j, "kmax", g.kmax);
  g.validate();
  return g;
}

std::string grid_to_json(const UpperHalfPlaneGrid& g) {
  return json{{"Y", g.Y}, {"dy", g.dy}, {"levels", g.levels}, {"t_max", g.t_max}, {"per_octave", g.per_octave}}.dump() +
         "\n";
}

std::string grid_to_json(const Upper3Grid& g) {
  return json{{"Y", g.Y},       {"dy", g.dy},     {"eta0", g.eta0}, {"H", g.H},
              {"deta", g.deta}, {"kmin", g.kmin}, {"kmax", g.kmax}}
             .dump() +
         "\n";
}

// -------------------------------------------------------------- lattices ----

std::string lattice_to_json(const TentLattice& lat, const std::vector<LatticePoint>& pts) {
  json j;
  j["params"] = {{"alpha", lat.params.alpha}, {"beta", lat.params.beta}, {"b", lat.params.b}};
  j["cx"] = lat.cx;
  j["cxi"] = lat.cxi;
  j["kmin"] = lat.kmin;
  j["kmax"] = lat.kmax;
  j["points"] = json::array();
  for (const auto& p : pts) j["points"].push_back({p.k, p.n, p.l});
  return j.dump() + "\n";
}

std::vector<std::array<long, 3>> lattice_triples_from_json(const std::string& text) {
  const json j = parse(text);
  const json& pts = j.is_array() ? j : (j.contains("points") ? j.at("points") : throw InputError("no points"));
  std::vector<std::array<long, 3>> out;
  for (const auto& p : pts) {
    if (!p.is_array() || p.size() != 3) throw InputError("lattice points are [k, n, l] triples");
    out.push_back({p[0].get<long>(), p[1].get<long>(), p[2].get<long>()});
  }
  return out;
}

// ---------------------------------------------------------------- config ----

ExperimentConfig config_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object()) throw InputError("config must be an object");
  static const std::set<std::string> known = {"suite", "seed",       "trials", "lambda", "mode",
                                              "exponents", "resolution", "params", "out_dir"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw InputError("unknown config key '" + it.key() + "'");
  ExperimentConfig c;
  c.suite = get<std::string>(j, "suite", "");
  c.seed = get<std::uint64_t>(j, "seed", 1);
  c.trials = get<int>(j, "trials", 0);
  if (c.trials < 0) throw InputError("trials must be nonnegative");
  if (j.contains("lambda")) {
    const auto& l = j.at("lambda");
    c.lambda.per_binade = need<int>(l, "per_binade");
    c.lambda.binades = need<int>(l, "binades");
    if (c.lambda.per_binade <= 0 || c.lambda.binades <= 0) throw InputError("lambda grid must be positive");
  }
  const auto mode = get<std::string>(j, "mode", "greedy");
  if (mode == "greedy") {
    c.mode = SolveMode::Greedy;
  } else if (mode == "exact") {
    c.mode = SolveMode::Exact;
  } else {
    throw InputError("mode must be exact or greedy");
  }
  if (j.contains("exponents")) {
    if (!j.at("exponents").is_array()) throw InputError("exponents must be an array");
    for (const auto& e : j.at("exponents")) c.exponents.push_back(as_real(e));
  }
  c.resolution = get<int>(j, "resolution", 0);
  c.out_dir = get<std::string>(j, "out_dir", "");
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw InputError("params must be an object");
    for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) c.params[it.key()] = as_real(it.value());
  }
  return c;
}

// ---------------------------------------------------------------- fields ----

namespace {

constexpr char kMagic[4] = {'O', 'L', 'P', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kEndianTag = 0x01020304u;
constexpr std::size_t kHeader = 112;

void put32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}
void put64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}
std::uint32_t get32(const std::string& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}
std::uint64_t get64(const std::string& b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}

}  // namespace

FieldFile field_file(const Field& F, const UpperHalfPlaneGrid& g) {
  if (F.size() != static_cast<std::size_t>(g.num_cells())) throw InputError("field does not match the grid");
  FieldFile f;
  f.kind = FieldGridKind::HalfPlane;
  f.dims = {static_cast<std::uint64_t>(g.levels), static_cast<std::uint64_t>(g.ny()), 1};
  f.params = {g.Y, g.dy, g.t_max, static_cast<double>(g.levels), static_cast<double>(g.per_octave), 0, 0, 0};
  f.values = F.values;
  return f;
}

FieldFile field_file(const Field& F, const Upper3Grid& g) {
  if (F.size() != static_cast<std::size_t>(g.num_cells())) throw InputError("field does not match the grid");
  FieldFile f;
  f.kind = FieldGridKind::TimeFrequency;
  f.dims = {static_cast<std::uint64_t>(g.nt()), static_cast<std::uint64_t>(g.neta()),
            static_cast<std::uint64_t>(g.ny())};
  f.params = {g.Y, g.dy, g.eta0, g.H, g.deta, static_cast<double>(g.kmin), static_cast<double>(g.kmax), 0};
  f.values = F.values;
  return f;
}

std::string encode_field(const FieldFile& f) {
  const std::uint64_t n = f.dims[0] * f.dims[1] * f.dims[2];
  if (n != f.values.size()) throw InputError("field dims do not match the value count");
  const std::uint32_t rank = f.dims[2] != 1 ? 3 : (f.dims[1] != 1 ? 2 : 1);
  std::string b;
  b.reserve(kHeader + 8 * n);
  b.append(kMagic, 4);
  put32(b, kVersion);
  put32(b, kEndianTag);
  put32(b, static_cast<std::uint32_t>(f.kind));
  put32(b, rank);
  put32(b, 0);
  for (auto d : f.dims) put64(b, d);
  for (double p : f.params) put64(b, std::bit_cast<std::uint64_t>(p));
  for (const auto& z : f.values) {
    put32(b, std::bit_cast<std::uint32_t>(static_cast<float>(z.real())));
    put32(b, std::bit_cast<std::uint32_t>(static_cast<float>(z.imag())));
  }
  return b;
}

FieldFile decode_field(const std::string& b) {
  if (b.size() < kHeader || std::memcmp(b.data(), kMagic, 4) != 0) throw InputError("not a field file");
  if (get32(b, 4) != kVersion) throw InputError("unsupported field file version");
  if (get32(b, 8) != kEndianTag) throw InputError("field file endianness tag mismatch");
  FieldFile f;
  const auto kind = get32(b, 12);
  if (kind > 2) throw InputError("unknown field grid kind");
  f.kind = static_cast<FieldGridKind>(kind);
  for (int i = 0; i < 3; ++i) f.dims[i] = get64(b, 24 + 8 * i);
  for (int i = 0; i < 8; ++i) f.params[i] = std::bit_cast<double>(get64(b, 48 + 8 * i));
  const std::uint64_t n = f.dims[0] * f.dims[1] * f.dims[2];
  if (f.dims[0] == 0 || n / f.dims[0] / std::max<std::uint64_t>(f.dims[1], 1) != f.dims[2] ||
      b.size() != kHeader + 8 * n)
    throw InputError("field file size does not match its dims");
  f.values.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const float re = std::bit_cast<float>(get32(b, kHeader + 8 * i));
    const float im = std::bit_cast<float>(get32(b, kHeader + 8 * i + 4));
    f.values[i] = cplx(re, im);
  }
  return f;
}

void write_field(const std::string& path, const FieldFile& f) { write_text(path, encode_field(f)); }

FieldFile read_field(const std::string& path) { return decode_field(read_text(path)); }

}  // namespace olp
