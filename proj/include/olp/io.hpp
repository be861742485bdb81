#pragma once

// JSON documents for spaces, results, grids, lattices, signals and suite
// configurations, and the binary field format (docs/field_format.md).
// Malformed input raises InputError.

#include <array>
#include <string>
#include <vector>

#include "olp/gentents.hpp"
#include "olp/harness.hpp"
#include "olp/outer.hpp"
#include "olp/tents.hpp"
#include "olp/wavelet.hpp"

namespace olp {

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// {cells:[{id,coords,weight}], gensets:[{id,members,sigma}]}
std::string space_to_json(const OuterSpace& space);
OuterSpace space_from_json(const std::string& text);

// {lambda, value, witness:[ids], status}
std::string slm_to_json(const SuperLevelResult& r);

// {"x0", "dx", "values": [[re, im], ...]} or a plain real array under "values";
// alternatively {"x0", "dx", "n", "family": {"kind", "seed", "extent", "index"}}
// samples member `index` of a generated family.
LineSignal signal_from_json(const std::string& text);
std::string signal_to_json(const LineSignal& f);

// {"Y","dy","levels","t_max","per_octave"} and {"Y","dy","eta0","H","deta","kmin","kmax"};
// missing keys keep the defaults.
UpperHalfPlaneGrid half_plane_grid_from_json(const std::string& text);
Upper3Grid upper3_grid_from_json(const std::string& text);
std::string grid_to_json(const UpperHalfPlaneGrid& g);
std::string grid_to_json(const Upper3Grid& g);

// {"params":{"alpha","beta","b"}, "cx","cxi","kmin","kmax", "points":[[k,n,l],...]}
std::string lattice_to_json(const TentLattice& lat, const std::vector<LatticePoint>& pts);
std::vector<std::array<long, 3>> lattice_triples_from_json(const std::string& text);

// {"suite","seed","trials","lambda":{"per_binade","binades"},"mode","exponents",
//  "resolution","params":{...}}; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);

enum class FieldGridKind : std::uint32_t { None = 0, HalfPlane = 1, TimeFrequency = 2 };

struct FieldFile {
  FieldGridKind kind = FieldGridKind::None;
  std::array<std::uint64_t, 3> dims{1, 1, 1};  // slowest first, unused trailing dims are 1
  std::array<double, 8> params{};              // grid parameters, layout per kind
  std::vector<cplx> values;                    // stored as complex64
};

FieldFile field_file(const Field& F, const UpperHalfPlaneGrid& g);
FieldFile field_file(const Field& F, const Upper3Grid& g);
std::string encode_field(const FieldFile& f);
FieldFile decode_field(const std::string& bytes);
void write_field(const std::string& path, const FieldFile& f);
FieldFile read_field(const std::string& path);

}  // namespace olp
