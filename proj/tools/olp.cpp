// olp: command line front end.  Exit codes: 0 pass, 1 assertion failure,
// 2 input error.  OLP_THREADS caps the worker count.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "olp/dyadic.hpp"
#include "olp/embeddings.hpp"
#include "olp/forms.hpp"
#include "olp/gentents.hpp"
#include "olp/harness.hpp"
#include "olp/io.hpp"
#include "olp/selection.hpp"
#include "olp/tents.hpp"

using namespace olp;
using nlohmann::json;

namespace {

struct AssertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

json real(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

double parse_p(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InputError("bad exponent '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw InputError("bad exponent '" + s + "'");
  }
}

std::vector<double> parse_list(const std::string& s, std::size_t n, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(parse_p(tok));
  if (v.size() != n) throw InputError(std::string(what) + " needs " + std::to_string(n) + " comma separated values");
  return v;
}

// avg-l1 | avg-l2 | avg-linf | avg-lp:P | sp:P (tent sizes)
SizeSpec parse_size(const std::string& s) {
  if (s == "avg-l1") return SizeSpec::avg_l1();
  if (s == "avg-l2") return SizeSpec::avg_l2();
  if (s == "avg-linf") return SizeSpec::avg_linf();
  if (s.rfind("avg-lp:", 0) == 0) return SizeSpec::avg_lp(parse_p(s.substr(7)));
  if (s.rfind("sp:", 0) == 0) return size_Sp(parse_p(s.substr(3)));
  throw InputError("unknown size '" + s + "'");
}

SolveMode parse_mode(const std::string& s) {
  if (s == "exact") return SolveMode::Exact;
  if (s == "greedy") return SolveMode::Greedy;
  throw InputError("mode must be exact or greedy");
}

// Cell field: {"values": [v, ...]} with reals or [re, im] pairs.
Field field_from_json(const std::string& text, std::size_t cells) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed field JSON: ") + e.what());
  }
  const json& vals = j.is_array() ? j : (j.contains("values") ? j.at("values") : throw InputError("field needs values"));
  Field F;
  for (const auto& v : vals) {
    if (v.is_number()) {
      F.values.emplace_back(v.get<double>(), 0.0);
    } else if (v.is_array() && v.size() == 2) {
      F.values.emplace_back(v[0].get<double>(), v[1].get<double>());
    } else {
      throw InputError("field values must be numbers or [re, im] pairs");
    }
  }
  if (F.size() != cells) throw InputError("field has " + std::to_string(F.size()) + " values, space has " +
                                          std::to_string(cells) + " cells");
  return F;
}

TentLattice lattice_opts(double alpha, double beta, double b, double cx, double cxi, int kmin, int kmax) {
  TentLattice lat;
  lat.params = {alpha, beta, b};
  lat.params.validate();
  lat.cx = cx;
  lat.cxi = cxi;
  lat.kmin = kmin;
  lat.kmax = kmax;
  if (!(cx > 0 && cxi > 0) || kmin > kmax) throw InputError("bad lattice constants");
  return lat;
}

void dump_failures(const SuiteReport& rep) {
  std::cerr << "suite " << rep.suite << " FAILED: " << rep.diagnostic << "\n";
  int shown = 0;
  for (const auto& r : rep.rows) {
    if (r.pass) continue;
    if (shown++ == 20) {
      std::cerr << "  ...\n";
      break;
    }
    std::fprintf(stderr, "  trial %d [%s] hash %s measured %.17g bound %.17g ratio %.17g (%s)\n", r.trial,
                 r.label.c_str(), r.hash.c_str(), r.measured, r.bound, r.ratio, r.provenance.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"outer Lebesgue space experiments"};
  app.require_subcommand(1);

  // space ---------------------------------------------------------------
  auto* space = app.add_subcommand("space", "build an outer space and write it as JSON");
  space->require_subcommand(1);
  std::string out;

  int dim = 1, dlev = 4;
  auto* sdy = space->add_subcommand("dyadic", "dyadic cubes of [0,1)^m down to level K");
  sdy->add_option("--dim", dim, "dimension m")->check(CLI::Range(1, 3));
  sdy->add_option("--levels", dlev, "depth K")->required()->check(CLI::Range(0, 20));
  sdy->add_option("--out", out, "output path, stdout when omitted");

  UpperHalfPlaneGrid hg;
  double talpha = 0.0, tbeta = 1.0;
  bool sparse = false;
  auto* stn = space->add_subcommand("tents", "tents on a half-plane grid, optionally tilted");
  stn->add_option("--ymax", hg.Y, "half width Y of the y range")->required();
  stn->add_option("--dy", hg.dy, "column width")->required();
  stn->add_option("--levels", hg.levels, "number of scales")->required();
  stn->add_option("--t-max", hg.t_max, "largest scale");
  stn->add_option("--per-octave", hg.per_octave, "scales per octave");
  stn->add_option("--alpha", talpha, "tilt");
  stn->add_option("--beta", tbeta, "height factor in (0, 1]");
  stn->add_flag("--sparse", sparse, "sparse tip lattice instead of every cell centre");
  stn->add_option("--out", out, "output path");

  std::string grid3;
  double galpha = 1.0, gbeta = 0.0, gb = 1.0 / 256, cx = 1.0 / 16, cxi = 1.0 / 256;
  int kmin = -3, kmax = 6;
  std::string lattice_out;
  auto* sgt = space->add_subcommand("gentents", "lattice generalized tents on a time-frequency grid");
  sgt->add_option("--alpha", galpha, "alpha");
  sgt->add_option("--beta", gbeta, "beta, |beta| <= alpha");
  sgt->add_option("--b", gb, "b, 0 < b <= alpha / 2");
  sgt->add_option("--grid", grid3, "grid JSON")->required()->check(CLI::ExistingFile);
  sgt->add_option("--cx", cx, "x lattice constant");
  sgt->add_option("--cxi", cxi, "xi lattice constant");
  sgt->add_option("--kmin", kmin, "smallest s level");
  sgt->add_option("--kmax", kmax, "largest s level");
  sgt->add_option("--lattice-out", lattice_out, "write the (k, n, l) triples here");
  sgt->add_option("--out", out, "output path");

  // norm / slm ------------------------------------------------------------
  std::string space_path, field_path, size = "avg-l1", mode = "exact", pstr = "1";
  bool weak = false;
  double lambda = 1.0;
  int per_binade = 64, binades = 40;
  auto* norm = app.add_subcommand("norm", "outer L^p or weak L^p norm of a cell field");
  norm->add_option("--space", space_path)->required()->check(CLI::ExistingFile);
  norm->add_option("--field", field_path)->required()->check(CLI::ExistingFile);
  norm->add_option("--size", size, "avg-l1 | avg-l2 | avg-linf | avg-lp:P | sp:P");
  norm->add_option("--p", pstr, "exponent, inf allowed");
  norm->add_flag("--weak", weak, "weak norm");
  norm->add_option("--mode", mode, "exact | greedy");
  norm->add_option("--per-binade", per_binade);
  norm->add_option("--binades", binades);
  norm->add_option("--out", out);

  auto* slm = app.add_subcommand("slm", "super level measure mu(S(f) > lambda)");
  slm->add_option("--space", space_path)->required()->check(CLI::ExistingFile);
  slm->add_option("--field", field_path)->required()->check(CLI::ExistingFile);
  slm->add_option("--size", size);
  slm->add_option("--lambda", lambda)->required();
  slm->add_option("--mode", mode);
  slm->add_option("--out", out);

  // embed -------------------------------------------------------------------
  std::string wavelet = "space", signal_path, grid_path;
  double band = 0.25;
  auto* emb = app.add_subcommand("embed", "wavelet embedding of a line signal, binary field output");
  emb->add_option("--wavelet", wavelet, "space | freq")->check(CLI::IsMember({"space", "freq"}));
  emb->add_option("--signal", signal_path)->required()->check(CLI::ExistingFile);
  emb->add_option("--grid", grid_path)->required()->check(CLI::ExistingFile);
  emb->add_option("--band", band, "frequency bump parameter for --wavelet freq");
  emb->add_option("--out", out)->required();

  // select ------------------------------------------------------------------
  auto* sel = app.add_subcommand("select", "weak L^2 tent selection at level lambda");
  sel->add_option("--signal", signal_path)->required()->check(CLI::ExistingFile);
  sel->add_option("--grid", grid_path)->required()->check(CLI::ExistingFile);
  sel->add_option("--lambda", lambda)->required();
  sel->add_option("--band", band);
  sel->add_option("--alpha", galpha);
  sel->add_option("--beta", gbeta);
  sel->add_option("--b", gb);
  sel->add_option("--cx", cx);
  sel->add_option("--cxi", cxi);
  sel->add_option("--kmin", kmin);
  sel->add_option("--kmax", kmax);
  sel->add_option("--out", out);

  // bht ---------------------------------------------------------------------
  std::string beta_str = "1,0,-1", p3 = "3,3,3";
  std::vector<std::string> sigs;
  bool calibrate = false;
  auto* bht = app.add_subcommand("bht", "bilinear Hilbert form, model form and outer norm chain");
  bht->add_option("--beta", beta_str, "b1,b2,b3 orthogonal to (1,1,1)");
  bht->add_option("--signals", sigs)->required()->expected(3)->check(CLI::ExistingFile);
  bht->add_option("--p", p3, "p1,p2,p3");
  bht->add_option("--grid", grid_path, "time-frequency grid JSON")->check(CLI::ExistingFile);
  bht->add_option("--band", band);
  bht->add_flag("--calibrate", calibrate, "fit a', b' on Gaussian triples instead of the closed form");
  bht->add_option("--report", out);

  // verify ------------------------------------------------------------------
  std::string suite, config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  auto* ver = app.add_subcommand("verify", "run a named suite and write rows.csv, summary.json, curves.tsv");
  ver->add_option("suite", suite, "suite name, or 'list'")->required();
  ver->add_option("--config", config_path)->check(CLI::ExistingFile);
  ver->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });
  ver->add_option("--out", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sdy->parsed()) {
      emit(space_to_json(build_dyadic_space(dim, dlev)), out);
    } else if (stn->parsed()) {
      hg.validate();
      const auto tips = sparse ? sparse_tip_lattice(hg) : default_tip_lattice(hg);
      const bool tilted = talpha != 0.0 || tbeta != 1.0;
      const auto ts = tilted ? build_tilted_tent_space(hg, tips, talpha, tbeta) : build_tent_space(hg, tips);
      emit(space_to_json(ts.space), out);
    } else if (sgt->parsed()) {
      const auto g = upper3_grid_from_json(read_text(grid3));
      const auto lat = lattice_opts(galpha, gbeta, gb, cx, cxi, kmin, kmax);
      const auto gs = build_gentent_space(g, lat);
      emit(space_to_json(gs.space), out);
      if (!lattice_out.empty()) write_text(lattice_out, lattice_to_json(lat, lat.enumerate(g)));
    } else if (norm->parsed()) {
      const auto X = space_from_json(read_text(space_path));
      const auto F = field_from_json(read_text(field_path), X.num_cells());
      const double p = parse_p(pstr);
      const LambdaGrid lg{per_binade, binades};
      const auto S = parse_size(size);
      const auto r = weak ? weak_lp_norm(X, S, F, p, lg, parse_mode(mode)) : lp_norm(X, S, F, p, lg, parse_mode(mode));
      json j{{"p", real(p)},        {"weak", weak},          {"value", real(r.value)}, {"lower", real(r.lower)},
             {"upper", real(r.upper)}, {"exact", r.exact}, {"size", S.name()}};
      emit(j.dump() + "\n", out);
    } else if (slm->parsed()) {
      const auto X = space_from_json(read_text(space_path));
      const auto F = field_from_json(read_text(field_path), X.num_cells());
      emit(slm_to_json(super_level_measure(X, parse_size(size), F, lambda, parse_mode(mode))), out);
    } else if (emb->parsed()) {
      const auto f = signal_from_json(read_text(signal_path));
      if (wavelet == "space") {
        const auto g = half_plane_grid_from_json(read_text(grid_path));
        write_field(out, field_file(embed_half_plane(f, MotherWavelet::bump_derivative(), g), g));
      } else {
        const auto g = upper3_grid_from_json(read_text(grid_path));
        write_field(out, field_file(embed_time_frequency(f, MotherWavelet::frequency_bump(band), g), g));
      }
    } else if (sel->parsed()) {
      const auto f = signal_from_json(read_text(signal_path));
      const auto g = upper3_grid_from_json(read_text(grid_path));
      const auto lat = lattice_opts(galpha, gbeta, gb, cx, cxi, kmin, kmax);
      const auto lc = build_lattice_classes(g, lat);
      const auto a = embed_time_frequency(f, MotherWavelet::frequency_bump(band), g).abs();
      const auto R = select_tents_weak2(lc, a, lambda);
      json j;
      j["lambda"] = R.lambda;
      j["total_sigma"] = R.total_sigma;
      j["counts"] = {{"stage1", R.stage1}, {"plus", R.plus}, {"minus", R.minus}};
      j["tents"] = json::array();
      for (const auto& t : R.tents)
        j["tents"].push_back({{"stage", t.stage}, {"k", t.k}, {"n", t.n}, {"l", t.l}, {"x", t.tent.x},
                              {"xi", t.tent.xi}, {"s", t.tent.s}, {"clipped", t.clipped}});
      j["certificate"] = {{"holds", R.cert.holds},         {"disjoint", R.cert.disjoint},
                          {"max_size", R.cert.max_size},   {"tents", R.cert.tents},
                          {"clipped_tents", R.cert.clipped_tents}, {"overlap_cells", R.cert.overlap_cells}};
      emit(j.dump(2) + "\n", out);
      if (!R.cert.holds || !R.cert.disjoint) throw AssertionFailure("selection certificate failed");
    } else if (bht->parsed()) {
      const auto b = parse_list(beta_str, 3, "--beta");
      const auto p = parse_list(p3, 3, "--p");
      const auto B = BetaVector::make(b[0], b[1], b[2]);
      std::array<LineSignal, 3> f{signal_from_json(read_text(sigs[0])), signal_from_json(read_text(sigs[1])),
                                  signal_from_json(read_text(sigs[2]))};
      Upper3Grid g;
      g.Y = 4;
      g.dy = 0.25;
      g.H = 2;
      g.deta = 0.125;
      g.kmin = -1;
      g.kmax = 2;
      if (!grid_path.empty()) g = upper3_grid_from_json(read_text(grid_path));
      const auto phi = MotherWavelet::frequency_bump(band);
      ReductionFit fit;
      if (calibrate) {
        auto gauss = [&](double c) {
          return LineSignal::sample(-32.0, 1.0 / 16, 1025, [=](double x) {
            return cplx(std::exp(-0.5 * (x - c) * (x - c)), 0.0);
          });
        };
        fit = calibrate_reduction({gauss(0), gauss(0), gauss(0)}, {gauss(0), gauss(0), gauss(1)}, phi, B);
      } else {
        const double phi0 = model_form_phi0(phi, B);
        fit = {cplx(std::sqrt(3.0) / 2 * phi0, 0.0), cplx(0.0, std::sqrt(3.0) / (2 * kPi) * phi0)};
      }
      const auto r = bht_outer_bound(f[0], f[1], f[2], B, p[0], p[1], p[2], phi, g, fit);
      json j;
      j["lambda_value"] = cjson(r.lambda_value);
      j["model_value"] = cjson(r.model_value);
      j["a"] = cjson(r.fit.a);
      j["b"] = cjson(r.fit.b);
      j["residual"] = r.residual;
      j["outer_norms"] = {r.outer_norms[0], r.outer_norms[1], r.outer_norms[2]};
      j["ratios"] = {real(r.ratio_lambda), real(r.ratio_model), real(r.ratio_model_outer)};
      j["classical_norms"] = {r.classical[0], r.classical[1], r.classical[2]};
      j["factorization_max_ratio"] = r.factorization.max_ratio;
      j["disjoint"] = r.disjoint;
      emit(j.dump(2) + "\n", out);
    } else if (ver->parsed()) {
      if (suite == "list") {
        for (const auto& s : suite_names()) std::cout << s << "\n";
        return 0;
      }
      ExperimentConfig cfg;
      if (!config_path.empty()) cfg = config_from_json(read_text(config_path));
      if (!cfg.suite.empty() && cfg.suite != suite)
        throw InputError("config names suite '" + cfg.suite + "' but '" + suite + "' was requested");
      cfg.suite = suite;
      if (!is_suite(suite)) {
        std::string names;
        for (const auto& s : suite_names()) names += " " + s;
        throw InputError("unknown suite '" + suite + "'; known:" + names);
      }
      if (seed_set) cfg.seed = seed;
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      const auto rep = run_suite(cfg);
      if (!cfg.out_dir.empty()) write_artifacts(rep, cfg, cfg.out_dir);
      long failures = 0;
      for (const auto& r : rep.rows) failures += !r.pass;
      std::printf("%s %s: %zu rows, %ld failing, %.1fs\n", rep.pass ? "PASS" : "FAIL", rep.suite.c_str(),
                  rep.rows.size(), failures, rep.seconds);
      if (!rep.pass) {
        dump_failures(rep);
        return 1;
      }
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const AssertionFailure& e) {
    std::cerr << "assertion failed: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
