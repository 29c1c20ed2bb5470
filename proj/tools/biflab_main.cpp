// Command-line front end. Every run owns an output directory, writes its
// artifacts there, and finishes with a manifest.json echoing the resolved
// configuration, the seed, wall time, and a content hash per output file.
// Exit codes: 0 success, 1 domain errors, 2 usage errors.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biflab/equidist.hpp"
#include "biflab/family.hpp"
#include "biflab/hyperset.hpp"
#include "biflab/io.hpp"
#include "biflab/misiurewicz.hpp"
#include "biflab/parallel.hpp"
#include "biflab/potential.hpp"
#include "biflab/version.hpp"

namespace fs = std::filesystem;
using namespace biflab;
using nlohmann::ordered_json;

namespace {

struct RunContext {
  fs::path out_dir;
  ordered_json config;
  std::uint64_t seed = 0;
  std::vector<fs::path> outputs;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  fs::path artifact(const std::string& name) {
    const fs::path p = out_dir / name;
    outputs.push_back(p);
    return p;
  }

  void finish(const std::string& command) {
    ordered_json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["seed"] = seed;
    m["config"] = config;
    m["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    m["outputs"] = ordered_json::array();
    std::vector<fs::path> sorted = outputs;
    std::sort(sorted.begin(), sorted.end());
    for (const fs::path& p : sorted) {
      ordered_json o;
      o["path"] = p.filename().string();
      o["bytes"] = fs::file_size(p);
      char hex[20];
      std::snprintf(hex, sizeof hex, "%016llx",
                    static_cast<unsigned long long>(file_fnv1a64(p.string())));
      o["fnv1a64"] = hex;
      m["outputs"].push_back(o);
    }
    std::ofstream out(out_dir / "manifest.json");
    out << m.dump(2) << "\n";
  }
};

std::vector<cplx> parse_points(const std::vector<double>& flat,
                               const char* what) {
  if (flat.empty() || flat.size() % 2 != 0)
    throw std::invalid_argument(std::string(what) + ": expected re,im pairs");
  std::vector<cplx> out;
  for (std::size_t i = 0; i + 1 < flat.size(); i += 2)
    out.emplace_back(flat[i], flat[i + 1]);
  return out;
}

Rect parse_bounds(const std::vector<double>& b, const char* what) {
  if (b.size() != 4)
    throw std::invalid_argument(std::string(what) +
                                ": expected reLo,reHi,imLo,imHi");
  return Rect{b[0], b[1], b[2], b[3]};
}

GridSpec make_grid(const FamilySpec& fam, int coord, Rect bounds, int res,
                   std::vector<cplx> base) {
  if (base.empty()) base.assign(std::size_t(fam.param_dim()), cplx(0.0));
  if (int(base.size()) != fam.param_dim())
    throw std::invalid_argument("--base: one re,im pair per parameter");
  AxisSpec ax;
  ax.param_index = coord;
  ax.bounds = bounds;
  ax.nx = ax.ny = res;
  return GridSpec(std::move(base), {ax});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "numerical toolkit for bifurcation currents of critically marked "
      "polynomial families"};
  app.require_subcommand(1);
  app.set_config("--config");
  app.allow_config_extras(false);
  // global flags remain valid after the subcommand name
  app.fallthrough();

  std::string family_name = "quadratic";
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 0;
  app.add_option("--family", family_name, "family: quadratic | cubic_pm")
      ->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "pseudorandom seed")->capture_default_str();
  app.add_option("--threads", threads, "cap on worker threads (0 = all)")
      ->capture_default_str();

  // potential ----------------------------------------------------------------
  auto* potential = app.add_subcommand(
      "potential", "activity potential of a marked critical point on a grid");
  std::vector<double> pot_bounds{-2.5, 1.5, -1.5, 1.5};
  int pot_res = 512, pot_coord = 0, pot_crit = 0;
  double pot_tol = 1e-8;
  std::vector<double> pot_base;
  potential->add_option("--bounds", pot_bounds,
                        "reLo,reHi,imLo,imHi of the varying coordinate")->delimiter(',');
  potential->add_option("--res", pot_res, "samples per real axis");
  potential->add_option("--tol", pot_tol, "potential accuracy");
  potential->add_option("--coord", pot_coord, "which parameter varies");
  potential->add_option("--crit", pot_crit, "marked critical point index");
  potential->add_option("--base", pot_base,
                        "fixed parameter values as re,im pairs")->delimiter(',');

  // wedge ----------------------------------------------------------------
  auto* wedge = app.add_subcommand(
      "wedge", "wedge density of two activity potentials (two coordinates)");
  std::vector<double> w_bounds0{-1.0, 1.0, -1.0, 1.0};
  std::vector<double> w_bounds1{-1.0, 1.0, -1.0, 1.0};
  int w_res = 64, w_crit0 = 0, w_crit1 = 1;
  double w_tol = 1e-7, w_sigma_cells = 2.5;
  wedge->add_option("--bounds0", w_bounds0, "bounds of coordinate 0")->delimiter(',');
  wedge->add_option("--bounds1", w_bounds1, "bounds of coordinate 1")->delimiter(',');
  wedge->add_option("--res", w_res, "samples per real axis");
  wedge->add_option("--tol", w_tol, "potential accuracy");
  wedge->add_option("--sigma-cells", w_sigma_cells,
                    "smoothing width in grid steps (>= 2)");
  wedge->add_option("--crit0", w_crit0, "first critical index");
  wedge->add_option("--crit1", w_crit1, "second critical index");

  // misiurewicz ----------------------------------------------------------------
  auto* mis = app.add_subcommand("misiurewicz",
                                 "solve and certify one preperiodic parameter");
  std::vector<int> mis_spec{2, 1};
  std::vector<double> mis_seed_pt{-1.8, 0.0};
  double mis_tol = 1e-12;
  mis->add_option("--spec", mis_spec, "n,m per critical point")->delimiter(',');
  mis->add_option("--seed-point", mis_seed_pt, "Newton seed, re,im pairs")->delimiter(',');
  mis->add_option("--tol", mis_tol, "Newton tolerance");

  // enumerate ----------------------------------------------------------------
  auto* enu = app.add_subcommand(
      "enumerate", "complete preperiodic enumeration (one parameter)");
  int enu_n = 2, enu_m = 1;
  double enu_box = 3.0;
  enu->add_option("--n", enu_n, "preperiod");
  enu->add_option("--m", enu_m, "period");
  enu->add_option("--box", enu_box, "half side of the search square");

  // hyperset ----------------------------------------------------------------
  auto* hyp = app.add_subcommand(
      "hyperset", "hyperbolic two-branch system, balanced samples, motion");
  std::vector<double> hyp_at{-3.0, 0.0};
  std::vector<double> hyp_center;
  double hyp_radius = 0;
  int hyp_mcap = 4, hyp_depth = 16, hyp_samples = 4096, hyp_qcap = 5,
      hyp_steps = 20;
  std::vector<double> hyp_motion;
  hyp->add_option("--at", hyp_at, "base parameter, re,im pairs")->delimiter(',');
  hyp->add_option("--center", hyp_center, "explicit ball center re,im")->delimiter(',');
  hyp->add_option("--radius", hyp_radius, "explicit ball radius");
  hyp->add_option("--m-cap", hyp_mcap, "max iterate for the branches");
  hyp->add_option("--depth", hyp_depth, "itinerary depth for samples");
  hyp->add_option("--samples", hyp_samples, "balanced-measure sample count");
  hyp->add_option("--q-cap", hyp_qcap, "period cap for repelling targets");
  hyp->add_option("--motion-to", hyp_motion,
                  "continue the system to this parameter (re,im pairs)")->delimiter(',');
  hyp->add_option("--steps", hyp_steps, "motion steps");

  // equidist ----------------------------------------------------------------
  auto* eq = app.add_subcommand(
      "equidist", "post-critical solution clouds vs the bifurcation density");
  int eq_targets = 2, eq_nmin = 8, eq_nmax = 13, eq_levels = 4,
      eq_ref_res = 512;
  std::vector<double> eq_ref_bounds{-4.0, 4.0, -4.0, 4.0};
  double eq_ref_tol = 1e-8;
  eq->add_option("--targets", eq_targets, "number of pseudorandom targets");
  eq->add_option("--nmin", eq_nmin, "first iterate");
  eq->add_option("--nmax", eq_nmax, "last iterate");
  eq->add_option("--levels", eq_levels, "dyadic discrepancy levels");
  eq->add_option("--ref-res", eq_ref_res, "reference density resolution");
  eq->add_option("--ref-bounds", eq_ref_bounds, "reference density bounds")->delimiter(',');
  eq->add_option("--ref-tol", eq_ref_tol, "reference potential accuracy");

  // search-near ----------------------------------------------------------------
  auto* sn = app.add_subcommand(
      "search-near", "budgeted certificate search in a parameter ball");
  std::vector<double> sn_at{-0.75, 0.0};
  double sn_radius = 0.1;
  int sn_ncap = 12, sn_mcap = 4, sn_sumcap = 0, sn_seeds_per_spec = 0;
  long sn_budget = 10000;
  sn->add_option("--at", sn_at, "ball center, re,im pairs")->delimiter(',');
  sn->add_option("--radius", sn_radius, "ball radius");
  sn->add_option("--n-cap", sn_ncap, "max preperiod");
  sn->add_option("--m-cap", sn_mcap, "max period");
  sn->add_option("--sum-cap", sn_sumcap, "cap on n+m (0 = none)");
  sn->add_option("--budget", sn_budget, "total Newton runs");
  sn->add_option("--seeds-per-spec", sn_seeds_per_spec,
                 "Newton seeds per spec (0 = split budget)");

  CLI11_PARSE(app, argc, argv);

  try {
    thread_cap().store(threads);
    FamilySpec fam = FamilySpec::by_name(family_name);
    fs::create_directories(out_dir);
    RunContext run;
    run.out_dir = out_dir;
    run.seed = seed;
    run.config["family"] = family_name;
    run.config["out"] = out_dir;
    run.config["seed"] = seed;
    run.config["threads"] = threads;

    if (*potential) {
      const Rect bounds = parse_bounds(pot_bounds, "--bounds");
      run.config["bounds"] = pot_bounds;
      run.config["res"] = pot_res;
      run.config["tol"] = pot_tol;
      run.config["coord"] = pot_coord;
      run.config["crit"] = pot_crit;
      std::vector<cplx> base;
      if (!pot_base.empty()) base = parse_points(pot_base, "--base");
      GridSpec g = make_grid(fam, pot_coord, bounds, pot_res, std::move(base));
      ScalarField u = activity_potential_grid(fam, g, pot_crit, pot_tol);
      write_field_csv(run.artifact("potential.csv").string(), u,
                      "activity_potential");
      write_field_pgm(run.artifact("potential.pgm").string(), u);
      DensityField d = ddc_mass(u);
      write_density_csv(run.artifact("density.csv").string(), d, "ddc_mass");
      write_density_pgm(run.artifact("density.pgm").string(), d);
      run.config["density_raw_total"] = d.raw_total();
      run.config["density_clamped_total"] = d.clamped_total();
      run.finish("potential");
    } else if (*wedge) {
      if (fam.param_dim() < 2)
        throw std::invalid_argument("wedge needs a two-parameter family");
      run.config["bounds0"] = w_bounds0;
      run.config["bounds1"] = w_bounds1;
      run.config["res"] = w_res;
      run.config["tol"] = w_tol;
      run.config["sigma_cells"] = w_sigma_cells;
      run.config["crit0"] = w_crit0;
      run.config["crit1"] = w_crit1;
      AxisSpec a0, a1;
      a0.param_index = 0;
      a0.bounds = parse_bounds(w_bounds0, "--bounds0");
      a0.nx = a0.ny = w_res;
      a1.param_index = 1;
      a1.bounds = parse_bounds(w_bounds1, "--bounds1");
      a1.nx = a1.ny = w_res;
      GridSpec g(std::vector<cplx>(std::size_t(fam.param_dim()), cplx(0.0)),
                 {a0, a1});
      ScalarField u = activity_potential_grid(fam, g, w_crit0, w_tol);
      ScalarField v = activity_potential_grid(fam, g, w_crit1, w_tol);
      const double h = std::max(g.axes()[0].step_x(), g.axes()[1].step_x());
      DensityField d = wedge_mass_2d(u, v, w_sigma_cells * h);
      write_density_csv(run.artifact("wedge.csv").string(), d, "wedge_mass");
      run.config["wedge_raw_total"] = d.raw_total();
      run.config["wedge_clamped_total"] = d.clamped_total();
      run.finish("wedge");
      if (d.clamped_total() > 0.05 * d.total_mass()) {
        std::cerr << "wedge: clamped mass " << d.clamped_total()
                  << " exceeds 5% of the total " << d.total_mass() << "\n";
        return 1;
      }
    } else if (*mis) {
      if (int(mis_spec.size()) != 2 * fam.param_dim())
        throw std::invalid_argument("--spec: n,m per critical point");
      PreperiodicSpec spec;
      for (std::size_t i = 0; i + 1 < mis_spec.size(); i += 2)
        spec.push_back({mis_spec[i], mis_spec[i + 1]});
      const std::vector<cplx> seed_pt =
          parse_points(mis_seed_pt, "--seed-point");
      run.config["spec"] = mis_spec;
      run.config["seed_point"] = mis_seed_pt;
      run.config["tol"] = mis_tol;
      NewtonOutcome nr = newton_solve(fam, spec, seed_pt, mis_tol);
      if (!nr.ok) {
        std::cerr << "misiurewicz: Newton failed ("
                  << (nr.fail == NewtonOutcome::Fail::singular ? "singular"
                                                               : "diverged")
                  << ") after " << nr.iterations << " iterations\n";
        run.finish("misiurewicz");
        return 1;
      }
      CertifyResult cr = certify(fam, nr.lambda, spec);
      if (!cr.accepted()) {
        std::cerr << "misiurewicz: rejected: " << to_string(cr.rejection->reason)
                  << " (measured " << cr.rejection->measured << ")\n";
        run.finish("misiurewicz");
        return 1;
      }
      cr.certificate->newton_iterations = nr.iterations;
      cr.certificate->seed = seed;
      std::vector<MisiurewiczCertificate> certs{*cr.certificate};
      write_certificates_jsonl(run.artifact("certificate.jsonl").string(),
                               certs);
      run.finish("misiurewicz");
    } else if (*enu) {
      run.config["n"] = enu_n;
      run.config["m"] = enu_m;
      run.config["box"] = enu_box;
      EnumerationResult er = enumerate_1d(
          fam, enu_n, enu_m, Rect{-enu_box, enu_box, -enu_box, enu_box});
      write_certificates_jsonl(run.artifact("certificates.jsonl").string(),
                               er.certificates);
      write_rejections_jsonl(run.artifact("rejected.jsonl").string(),
                             er.rejected);
      run.config["polynomial_degree"] = er.F.degree();
      run.config["certificates"] = er.certificates.size();
      run.config["rejected_roots"] = er.rejected.size();
      run.finish("enumerate");
    } else if (*hyp) {
      const std::vector<cplx> at = parse_points(hyp_at, "--at");
      run.config["at"] = hyp_at;
      run.config["m_cap"] = hyp_mcap;
      run.config["depth"] = hyp_depth;
      run.config["samples"] = hyp_samples;
      run.config["q_cap"] = hyp_qcap;
      BranchSearchConfig cfg;
      cfg.m_cap = hyp_mcap;
      if (!hyp_center.empty() || hyp_radius > 0) {
        const std::vector<cplx> c = parse_points(hyp_center, "--center");
        cfg.ball = {{c.at(0), hyp_radius}};
        run.config["center"] = hyp_center;
        run.config["radius"] = hyp_radius;
      }
      auto [sys, fail] = build_branch_system(fam, at, cfg);
      if (!sys) {
        std::cerr << "hyperset: no verified branch system; diagnostics:\n";
        for (std::size_t i = 0;
             i < std::min<std::size_t>(8, fail.diagnostics.size()); ++i)
          std::cerr << "  " << fail.diagnostics[i] << "\n";
        run.finish("hyperset");
        return 1;
      }
      run.config["system"] = {{"m", sys->m},
                              {"center", {sys->center.real(), sys->center.imag()}},
                              {"radius", sys->radius},
                              {"margin", sys->margin},
                              {"separation", sys->separation},
                              {"kappa", sys->kappa}};
      auto pts = sample_balanced(fam, *sys, hyp_depth, hyp_samples, seed);
      write_cantor_csv(run.artifact("measure.csv").string(), pts,
                       1.0 / double(hyp_samples));
      auto targets = repelling_targets(fam, *sys, hyp_qcap);
      write_targets_csv(run.artifact("targets.csv").string(), targets);
      if (!hyp_motion.empty()) {
        const std::vector<cplx> to = parse_points(hyp_motion, "--motion-to");
        run.config["motion_to"] = hyp_motion;
        run.config["steps"] = hyp_steps;
        std::vector<CantorPoint> tracked;
        for (const auto& t : targets) {
          CantorPoint p;
          p.code = t.code;
          p.z = t.point;
          p.periodic = true;
          tracked.push_back(p);
        }
        MotionResult mr = continue_motion(fam, *sys, tracked, to, hyp_steps);
        if (!mr.complete) {
          std::cerr << "hyperset: motion broke down after step "
                    << mr.steps_done << "\n";
          run.finish("hyperset");
          return 1;
        }
        write_cantor_csv(
            run.artifact("moved.csv").string(), mr.moved,
            1.0 / double(std::max<std::size_t>(1, mr.moved.size())));
        run.config["motion_complete"] = mr.complete;
      }
      run.finish("hyperset");
    } else if (*eq) {
      run.config["targets"] = eq_targets;
      run.config["nmin"] = eq_nmin;
      run.config["nmax"] = eq_nmax;
      run.config["levels"] = eq_levels;
      run.config["ref_res"] = eq_ref_res;
      run.config["ref_bounds"] = eq_ref_bounds;
      run.config["ref_tol"] = eq_ref_tol;
      GridSpec g = make_grid(
          fam, 0, parse_bounds(eq_ref_bounds, "--ref-bounds"), eq_ref_res, {});
      ScalarField u = activity_potential_grid(fam, g, 0, eq_ref_tol);
      DensityField ref = ddc_mass(u);
      std::vector<TargetTuple> targets;
      for (int t = 0; t < eq_targets; ++t)
        targets.push_back(
            make_pseudorandom_targets(fam, seed + std::uint64_t(t)));
      ConvergenceReport rep =
          convergence_report(fam, targets, eq_nmin, eq_nmax, ref, eq_levels);
      detail::write_file(run.artifact("report.json").string(),
                         report_json(rep).dump(2) + "\n");
      for (std::size_t t = 0; t < targets.size(); ++t) {
        SolveResult r = solve_targets(fam, targets[t], eq_nmax);
        write_cloud_csv(run.artifact("cloud_t" + std::to_string(t) + "_n" +
                                     std::to_string(eq_nmax) + ".csv")
                            .string(),
                        r.cloud);
      }
      run.finish("equidist");
    } else if (*sn) {
      const std::vector<cplx> at = parse_points(sn_at, "--at");
      run.config["at"] = sn_at;
      run.config["radius"] = sn_radius;
      run.config["n_cap"] = sn_ncap;
      run.config["m_cap"] = sn_mcap;
      run.config["sum_cap"] = sn_sumcap;
      run.config["budget"] = sn_budget;
      run.config["seeds_per_spec"] = sn_seeds_per_spec;
      SearchConfig cfg;
      cfg.n_cap = sn_ncap;
      cfg.m_cap = sn_mcap;
      cfg.sum_cap = sn_sumcap;
      cfg.budget = sn_budget;
      cfg.seeds_per_spec = sn_seeds_per_spec;
      cfg.seed = seed;
      SearchResult sr = search_near(fam, at, sn_radius, cfg);
      write_certificates_jsonl(run.artifact("certificates.jsonl").string(),
                               sr.certificates);
      run.config["diagnostics"] = {{"newton_runs", sr.diagnostics.newton_runs},
                                   {"converged", sr.diagnostics.converged},
                                   {"in_ball", sr.diagnostics.in_ball},
                                   {"certified", sr.diagnostics.certified},
                                   {"rejected", sr.diagnostics.rejected}};
      if (sr.certificates.empty())
        std::cerr << "search-near: no certificates within budget ("
                  << sr.diagnostics.newton_runs << " Newton runs, "
                  << sr.diagnostics.in_ball << " in-ball convergences)\n";
      run.finish("search-near");
    }
    return 0;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
