#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "olp/dyadic.hpp"
#include "olp/harness.hpp"
#include "olp/io.hpp"

using namespace olp;

namespace {

TentSpace small_tents() {
  UpperHalfPlaneGrid g;
  g.Y = 2.0;
  g.dy = 0.25;
  g.levels = 4;
  g.t_max = 1.0;
  g.per_octave = 2;
  return build_tent_space(g, default_tip_lattice(g));
}

}  // namespace

TEST_CASE("signal families are seeded and compactly supported") {
  for (auto k : {SignalKind::GaussianMix, SignalKind::Step, SignalKind::RandomTrig, SignalKind::WavePacket,
                 SignalKind::Spike}) {
    SignalFamily fam{k, 3, 11, 4.0, true};
    const auto a = generate_signals(fam), b = generate_signals(fam);
    REQUIRE(a.size() == 3);
    const double L = signal_extent(fam);
    for (int i = 0; i < 3; ++i) {
      for (double x : {-1.3, 0.0, 0.7}) CHECK(a[i](x) == b[i](x));
      CHECK(a[i](L + 0.01) == cplx(0.0));
      CHECK(a[i](-L - 0.01) == cplx(0.0));
    }
    CHECK(parse_signal_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_signal_kind("sawtooth"), InputError);
}

TEST_CASE("Holder: trivial cases and the stated constant") {
  const auto ts = small_tents();
  HolderOptions o;
  o.trials = 6;
  o.p = 1;
  o.p1 = 2;
  o.p2 = 2;
  const auto r = verify_holder(ts.space, size_Sp(1), size_Sp(2), size_Sp(2), o);
  CHECK(r.pass);
  CHECK(r.rows.size() == 6);
  for (const auto& row : r.rows) CHECK(row.provenance == "stated-constant");
  o.p = 2;  // 1/2 != 1/2 + 1/2
  CHECK_THROWS_AS(verify_holder(ts.space, size_Sp(1), size_Sp(2), size_Sp(2), o), InputError);
}

TEST_CASE("log convexity constants and the step curve") {
  CHECK(log_convexity_constant(2, 1, 4) == doctest::Approx(std::sqrt(3.0)));
  CHECK(log_convexity_constant(3, 2, kInf) == doctest::Approx(std::cbrt(3.0)));
  CHECK_THROWS_AS(log_convexity_constant(1, 2, 4), InputError);
  for (double h : {0.5, 2.0})
    for (double m : {0.25, 3.0}) {
      CHECK(log_convexity_step_ratio(h, m, 2, 1, 4) == doctest::Approx(1.0));
      CHECK(log_convexity_step_ratio(h, m, 3, 2, kInf) == doctest::Approx(1.0));
    }
}

TEST_CASE("pullback along the identity") {
  const auto ts = small_tents();
  std::vector<int> id(ts.space.num_cells());
  for (std::size_t c = 0; c < id.size(); ++c) id[c] = static_cast<int>(c);
  const auto pr = pullback_premise(ts.space, size_Sp(2), ts.space, size_Sp(2), id, SolveMode::Exact);
  CHECK(pr.ok);
  CHECK(pr.A == doctest::Approx(1.0));
  CHECK(pr.B == doctest::Approx(1.0));
  PullbackOptions o;
  o.trials = 4;
  const auto r = verify_pullback(ts.space, size_Sp(2), ts.space, size_Sp(2), id, o);
  CHECK(r.summary.at("C") <= 1.0 + 1e-9);
  std::vector<int> bad(id.size() - 1);
  CHECK_THROWS_AS(pullback_premise(ts.space, size_Sp(2), ts.space, size_Sp(2), bad, SolveMode::Exact), InputError);
}

TEST_CASE("Marcinkiewicz constant") {
  CHECK(marcinkiewicz_constant(2, 1, kInf, 1) == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(marcinkiewicz_constant(2, 1, 4, 1) == doctest::Approx(2.0 * std::sqrt(2.0 + 1.0)));
  CHECK_THROWS_AS(marcinkiewicz_constant(1, 1, 4, 1), InputError);
}

TEST_CASE("domination: cell weights give C = 1, one-tent fields meet the premise") {
  const auto ts = small_tents();
  std::vector<double> nu(ts.space.num_cells());
  for (std::size_t c = 0; c < nu.size(); ++c) nu[c] = ts.space.cells[c].weight;
  CHECK(domination_premise(ts.space, size_Sp(1), nu) == doctest::Approx(1.0));
  // f = 1 on one tent T: int f dnu = weight of T = S1(f)(T) sigma(T), and ||f||_1 >= that
  const auto& G = ts.space.gensets.back();
  std::vector<double> f(nu.size(), 0.0);
  double mass = 0.0;
  for (int c : G.members) {
    f[c] = 1.0;
    mass += nu[c];
  }
  const double S = size_value(ts.space, size_Sp(1), G.id, f);
  CHECK(mass == doctest::Approx(S * G.sigma));
  const auto L1 = lp_norm(ts.space, size_Sp(1), Field::from_real(f), 1.0, LambdaGrid{16, 24}, SolveMode::Exact);
  CHECK(mass <= 4.0 * L1.value);
  DominationOptions o;
  o.trials = 5;
  CHECK(verify_domination(ts.space, size_Sp(1), nu, o).pass);
}

TEST_CASE("suite registry") {
  const auto& n = suite_names();
  REQUIRE(n.size() >= 11);
  CHECK(n[0] == "dyadic-coincidence");
  CHECK(n[10] == "bht-bound");
  CHECK(is_suite("holder"));
  CHECK_FALSE(is_suite("nope"));
  ExperimentConfig c;
  c.suite = "nope";
  CHECK_THROWS_AS(run_suite(c), InputError);
}

TEST_CASE("same seed gives byte-identical artifacts") {
  ExperimentConfig c;
  c.suite = "dyadic-coincidence";
  c.trials = 4;
  c.seed = 9;
  const auto a = run_suite(c), b = run_suite(c);
  CHECK(a.pass);
  CHECK(rows_csv(a) == rows_csv(b));
  CHECK(curves_tsv(a) == curves_tsv(b));
  CHECK(rows_csv(a).rfind("trial,label,inputs_hash,measured,bound,ratio,pass,provenance\n", 0) == 0);
  const auto dir = std::filesystem::temp_directory_path() / "olp_test_artifacts";
  write_artifacts(a, c, dir.string());
  const auto j = nlohmann::json::parse(read_text((dir / "summary.json").string()));
  CHECK(j.at("suite") == "dyadic-coincidence");
  CHECK(j.at("pass") == true);
  CHECK(j.at("rows") == a.rows.size());
  CHECK(read_text((dir / "rows.csv").string()) == rows_csv(a));
  std::filesystem::remove_all(dir);
}

TEST_CASE("space JSON round trip") {
  const auto X = build_dyadic_space(1, 3);
  const auto Y = space_from_json(space_to_json(X));
  REQUIRE(Y.num_cells() == X.num_cells());
  REQUIRE(Y.num_gensets() == X.num_gensets());
  for (std::size_t g = 0; g < X.num_gensets(); ++g) {
    CHECK(Y.gensets[g].members == X.gensets[g].members);
    CHECK(Y.gensets[g].sigma == X.gensets[g].sigma);
  }
  CHECK_THROWS_AS(space_from_json("{\"cells\": []}"), InputError);
  CHECK_THROWS_AS(space_from_json("not json"), InputError);
  CHECK_THROWS_AS(space_from_json(R"({"cells":[{"id":0}],"gensets":[{"id":0,"members":[3],"sigma":1}]})"), InputError);
}

TEST_CASE("super level result JSON") {
  const auto X = build_dyadic_space(1, 2);
  const auto r = super_level_measure(X, SizeSpec::avg_l1(), Field::from_real({1, 0, 0, 2}), 0.5, SolveMode::Exact);
  const auto j = nlohmann::json::parse(slm_to_json(r));
  CHECK(j.at("lambda") == 0.5);
  CHECK(j.at("value").get<double>() == doctest::Approx(r.value));
  CHECK(j.at("status") == to_string(SolveStatus::Exact));
  CHECK(j.at("witness").size() == r.witness.ids.size());
}

TEST_CASE("field binary format") {
  UpperHalfPlaneGrid g;
  g.Y = 1;
  g.dy = 0.5;
  g.levels = 3;
  Field F(static_cast<std::size_t>(g.num_cells()));
  for (std::size_t c = 0; c < F.size(); ++c) F.values[c] = cplx(0.5 * double(c), -1.0 / (1.0 + double(c)));
  const auto ff = field_file(F, g);
  const auto bytes = encode_field(ff);
  CHECK(bytes.size() == 112 + 8 * F.size());
  CHECK(bytes.substr(0, 4) == "OLPF");
  // little-endian endianness tag at offset 8
  CHECK(static_cast<unsigned char>(bytes[8]) == 0x04);
  CHECK(static_cast<unsigned char>(bytes[11]) == 0x01);
  const auto back = decode_field(bytes);
  CHECK(back.kind == FieldGridKind::HalfPlane);
  CHECK(back.dims[0] == 3);
  CHECK(back.dims[1] == 4);
  CHECK(back.params[1] == 0.5);
  for (std::size_t c = 0; c < F.size(); ++c) {
    CHECK(back.values[c].real() == static_cast<float>(F.values[c].real()));
    CHECK(back.values[c].imag() == static_cast<float>(F.values[c].imag()));
  }
  CHECK_THROWS_AS(decode_field(bytes.substr(0, 100)), InputError);
  CHECK_THROWS_AS(decode_field(bytes.substr(0, bytes.size() - 8)), InputError);
  std::string swapped = bytes;
  std::swap(swapped[8], swapped[11]);
  CHECK_THROWS_AS(decode_field(swapped), InputError);
}

TEST_CASE("config, signal, grid and lattice JSON") {
  const auto c = config_from_json(
      R"({"suite":"holder","seed":5,"trials":3,"lambda":{"per_binade":8,"binades":10},"mode":"exact","exponents":[1,"inf"],"params":{"alpha":0.5}})");
  CHECK(c.suite == "holder");
  CHECK(c.seed == 5);
  CHECK(c.trials == 3);
  CHECK(c.lambda.per_binade == 8);
  CHECK(c.mode == SolveMode::Exact);
  CHECK(c.exponents.size() == 2);
  CHECK(c.exponents[1] == kInf);
  CHECK(c.param("alpha", 0) == 0.5);
  CHECK(c.param("beta", 7) == 7);
  CHECK_THROWS_AS(config_from_json(R"({"sead": 1})"), InputError);
  CHECK_THROWS_AS(config_from_json(R"({"mode": "fast"})"), InputError);

  const auto f = signal_from_json(R"({"x0": -1, "dx": 0.5, "values": [1, [2, 3], 0]})");
  CHECK(f.size() == 3);
  CHECK(f.v[1] == cplx(2, 3));
  const auto f2 = signal_from_json(signal_to_json(f));
  CHECK(f2.v == f.v);
  const auto h = signal_from_json(R"({"x0": -8, "dx": 0.25, "n": 65, "family": {"kind": "step", "seed": 3}})");
  CHECK(h.size() == 65);
  CHECK_THROWS_AS(signal_from_json(R"({"x0": 0, "dx": 0})"), InputError);

  const auto g = half_plane_grid_from_json(R"({"Y": 2, "dy": 0.25, "levels": 5})");
  CHECK(g.ny() == 16);
  CHECK(half_plane_grid_from_json(grid_to_json(g)).levels == 5);
  CHECK_THROWS_AS(half_plane_grid_from_json(R"({"Y": 2, "dy": 0.3})"), InputError);
  const auto g3 = upper3_grid_from_json(R"({"Y": 2, "dy": 0.25, "H": 1, "deta": 0.25, "kmin": -1, "kmax": 1})");
  CHECK(g3.nt() == 3);

  TentLattice lat;
  lat.params = {1.0, 0.0, 0.25};
  lat.cx = 0.25;
  lat.cxi = 0.25;
  lat.kmin = -1;
  lat.kmax = 1;
  REQUIRE(!lat.enumerate(g3).empty());
  const auto pts = lat.enumerate(g3);
  const auto tri = lattice_triples_from_json(lattice_to_json(lat, pts));
  REQUIRE(tri.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(tri[i][0] == pts[i].k);
    CHECK(tri[i][1] == pts[i].n);
    CHECK(tri[i][2] == pts[i].l);
  }
}
