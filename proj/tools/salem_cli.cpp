#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>

#include "salem/pipeline.hpp"
#include "salem/parallel.hpp"

using namespace salem;
using io::json;

namespace {

constexpr int kOk = 0, kNegative = 1, kUsage = 2;

void emit(const std::string& out, const json& j) {
  if (out.empty() || out == "-")
    std::cout << j.dump(2) << '\n';
  else
    io::write_json(out, j);
}

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  return v;
}

// "triangle:theta,lam", "colinear:n,lam", "parallelogram:n", "vandermonde:eta,d,a1,...,a2n"
ConfigurationFamily family_from_spec(const std::string& spec) {
  auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const auto args = colon == std::string::npos ? std::vector<double>{} : split_numbers(spec.substr(colon + 1));
  auto need = [&](std::size_t count) {
    if (args.size() < count) throw Error("family " + name + " needs " + std::to_string(count) + " parameters");
  };
  if (name == "triangle") {
    need(2);
    double theta = args[0];
    if (std::fabs(theta - std::numbers::pi / 2) < 1e-15) theta = std::numbers::pi / 2;
    return make_triangle_system(theta, args[1]);
  }
  if (name == "colinear") {
    need(2);
    return make_colinear_system(static_cast<int>(args[0]), args[1]);
  }
  if (name == "parallelogram") {
    need(1);
    return make_parallelogram_system(static_cast<int>(args[0]));
  }
  if (name == "vandermonde") {
    need(4);
    return make_vandermonde_system(std::vector<double>(args.begin() + 2, args.end()), static_cast<int>(args[0]),
                                   static_cast<int>(args[1]));
  }
  throw Error("unknown family \"" + name + "\"");
}

MatrixSystem load_system(const std::string& file, const std::string& family) {
  if (!family.empty()) return family_from_spec(family).system;
  if (file.empty()) throw Error("give a system file or --family");
  return io::read_system(file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Configuration counting in fractal sets: systems, Salem measures, multilinear forms"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::uint64_t seed = 0;
  double tol = -1.0;
  double trunc_R = 64.0;
  int quad_Q = 4096;
  std::size_t samples = std::size_t{1} << 20;
  std::string out;

  auto common = [&](CLI::App* c) {
    c->add_option("--out", out, "Output path (stdout when omitted)");
  };

  // nondegen
  std::string system_file, family;
  bool float_only = false;
  auto* nondegen = app.add_subcommand("nondegen", "Check the non-degeneracy condition of a system");
  nondegen->add_option("system", system_file, "System JSON");
  nondegen->add_option("--family", family, "Built-in family, e.g. triangle:1.5707963267948966,1");
  nondegen->add_option("--tol", tol, "Relative singular-value tolerance for the floating-point path");
  nondegen->add_flag("--float", float_only, "Skip exact arithmetic");
  common(nondegen);

  // gen-measure
  CantorParams cp;
  std::string mode = "independent-uniform";
  std::size_t grid_N = 0;
  bool pure_json = false;
  auto* gen = app.add_subcommand("gen-measure", "Generate a random Cantor measure");
  gen->add_option("--dim", cp.n, "Ambient dimension");
  gen->add_option("--M", cp.M, "Subdivision factor");
  gen->add_option("--T", cp.T, "Children kept per parent");
  gen->add_option("--stages", cp.stages, "Construction stages");
  gen->add_option("--mode", mode, "independent-uniform | radial-product");
  gen->add_option("--N", grid_N, "Grid resolution (default M^stages)");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_flag("--json", pure_json, "Write pure JSON (N <= 64)");
  gen->add_option("--out", out, "Measure file")->required();

  // fourier
  std::string measure_file;
  double xi_max = 0.0;
  int oversample = 1;
  auto* fourier = app.add_subcommand("fourier", "Sample the Fourier transform of a measure on a lattice");
  fourier->add_option("measure", measure_file, "Measure file")->required();
  fourier->add_option("--xi-max", xi_max, "Largest sup-norm frequency (default N/2)");
  fourier->add_option("--oversample", oversample, "Lattice points per unit frequency");
  fourier->add_option("--out", out, "CSV output")->required();

  // decay-fit
  std::string fourier_file;
  double window_lo = 8.0, window_hi = 256.0, alpha = -1.0;
  auto* decay = app.add_subcommand("decay-fit", "Fit the Fourier decay exponent");
  decay->add_option("fourier", fourier_file, "Fourier CSV")->required();
  decay->add_option("--window-lo", window_lo, "Window start");
  decay->add_option("--window-hi", window_hi, "Window end");
  decay->add_option("--measure", measure_file, "Measure file for the ball-condition constant");
  decay->add_option("--alpha", alpha, "Ball-condition exponent");
  common(decay);

  // mollify
  int n_moll = 8;
  std::string mu2_out;
  auto* mollify = app.add_subcommand("mollify", "Split a measure into a smooth part and a remainder");
  mollify->add_option("measure", measure_file, "Measure file")->required();
  mollify->add_option("--n-moll", n_moll, "Mollifier scale");
  mollify->add_option("--xi-max", xi_max, "Remainder transform extent (default N/2)");
  mollify->add_option("--mu2-hat", mu2_out, "CSV output for the remainder transform");
  common(mollify);

  // lambda
  std::string function_spec, method = "both";
  int grid = 256;
  auto* lambda = app.add_subcommand("lambda", "Evaluate the multilinear form");
  lambda->add_option("system", system_file, "System JSON");
  lambda->add_option("--family", family, "Built-in family");
  lambda->add_option("--measure", measure_file, "Use the mollified density of this measure");
  lambda->add_option("--n-moll", n_moll, "Mollifier scale for --measure");
  lambda->add_option("--function", function_spec,
                     "Function JSON: {\"type\":\"bump\"|\"indicator\"|\"ball-indicator\",...}");
  lambda->add_option("--method", method, "direct | fourier | both");
  lambda->add_option("--grid", grid, "Direct quadrature nodes per axis");
  lambda->add_option("--trunc-R", trunc_R, "Fourier truncation radius");
  lambda->add_option("--quad-Q", quad_Q, "Fourier nodes per axis");
  lambda->add_option("--samples", samples, "Monte Carlo samples");
  lambda->add_option("--seed", seed, "Monte Carlo seed");
  common(lambda);

  // search
  std::string points_file, exclusions_file;
  SearchOptions so;
  double point_tol = 0.0;
  auto* search = app.add_subcommand("search", "Search a discretised set for non-trivial configurations");
  search->add_option("system", system_file, "System JSON");
  search->add_option("--family", family, "Built-in family (supplies the exceptional subspaces)");
  search->add_option("--points", points_file, "Point set JSON or occupancy/measure file")->required();
  search->add_option("--tol", point_tol, "Matching tolerance (default from file or 1.5 cell diagonals)");
  search->add_option("--exclusions", exclusions_file, "JSON list of matrices whose null spaces are excluded");
  search->add_option("--y-steps", so.y_steps, "y grid resolution");
  search->add_option("--threshold", so.exclusion_threshold, "Exclusion threshold");
  search->add_option("--max-hits", so.max_hits, "Stop after this many hits");
  search->add_option("--cap", so.cap, "Maximum candidate evaluations");
  common(search);

  // cepsilon
  std::string vectors_json;
  double eps = 0.2;
  auto* cepsilon = app.add_subcommand("cepsilon", "Monte Carlo measure of the near-integral translation set");
  cepsilon->add_option("system", system_file, "System JSON");
  cepsilon->add_option("--family", family, "Built-in family");
  cepsilon->add_option("--vectors", vectors_json, "JSON list of integer vectors, e.g. [[1],[2]]")->required();
  cepsilon->add_option("--eps", eps, "Tolerance in (0,1)");
  cepsilon->add_option("--samples", samples, "Monte Carlo samples");
  cepsilon->add_option("--seed", seed, "Monte Carlo seed");
  common(cepsilon);

  // appendix-a
  std::string p_json = "[[0,1]]", eps_list = "0.125,0.0625,0.03125,0.015625";
  auto* appendix = app.add_subcommand("appendix-a", "Surface-measure limit check for a full-rank map P");
  appendix->add_option("--P", p_json, "P as a JSON matrix");
  appendix->add_option("--eps", eps_list, "Comma-separated eps values");
  appendix->add_option("--trunc-R", trunc_R, "Half-width along the surface");
  appendix->add_option("--quad-Q", quad_Q, "Surface nodes per axis");
  common(appendix);

  // pipeline
  std::string config_file;
  auto* pipeline = app.add_subcommand("pipeline", "Run a full seeded experiment from a config");
  pipeline->add_option("config", config_file, "Pipeline config JSON")->required();
  pipeline->add_option("--seed", seed, "Override the config seed");
  pipeline->add_option("--out", out, "Results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  set_default_threads(threads);

  try {
    if (*nondegen) {
      auto system = load_system(system_file, family);
      NondegeneracyOptions o;
      if (tol >= 0.0) o.tolerance = tol;
      o.allow_exact = !float_only;
      auto report = check_nondegenerate(system, o);
      emit(out, io::to_json(report));
      return report.passed ? kOk : kNegative;
    }
    if (*gen) {
      cp.mode = parse_cantor_mode(mode);
      cp.seed = seed;
      const std::size_t N = grid_N ? grid_N : ipow(cp.M, cp.stages);
      io::write_measure(out, gen_random_cantor(cp, N), pure_json);
      return kOk;
    }
    if (*fourier) {
      auto m = io::read_measure(measure_file);
      io::write_fourier_csv(out, fourier_transform(m, xi_max > 0 ? xi_max : 0.5 * m.N(), oversample));
      return kOk;
    }
    if (*decay) {
      auto fit = decay_exponent_fit(io::read_fourier_csv(fourier_file), window_lo, window_hi);
      json j{{"fit", io::to_json(fit)}};
      if (alpha >= 0.0) {
        if (measure_file.empty()) throw Error("--alpha needs --measure");
        j["ball"] = io::to_json(ball_condition_constant(io::read_measure(measure_file), alpha));
      }
      emit(out, j);
      return kOk;
    }
    if (*mollify) {
      auto m = io::read_measure(measure_file);
      auto split = mollify_split(m, n_moll, xi_max > 0 ? xi_max : 0.5 * m.N());
      if (!mu2_out.empty()) io::write_fourier_csv(mu2_out, split.mu2_hat);
      const auto& mu1 = split.mu1;
      emit(out, json{{"n", mu1.n()},
                     {"N", mu1.N()},
                     {"domain", {{"lo", mu1.domain().lo}, {"hi", mu1.domain().hi}}},
                     {"density_sup", mu1.sup()},
                     {"values", mu1.values()}});
      return kOk;
    }
    if (*lambda) {
      auto system = load_system(system_file, family);
      GridFunction f;
      if (!measure_file.empty())
        f = mollify_split(io::read_measure(measure_file), n_moll, 1.0).mu1;
      else if (!function_spec.empty())
        f = test_function(json::parse(function_spec), system.n());
      else
        throw Error("give --measure or --function");
      std::vector<GridFunction> fs(system.k(), f);
      json j{{"seed", seed}};
      LambdaResult d, fr;
      if (method == "direct" || method == "both") {
        DirectOptions o;
        o.grid = grid;
        o.samples = samples;
        o.seed = seed;
        d = lambda_direct(system, fs, o);
        j["direct"] = io::to_json(d);
      }
      if (method == "fourier" || method == "both") {
        FourierOptions o;
        o.R = trunc_R;
        o.Q = quad_Q;
        o.samples = samples;
        o.seed = seed;
        std::vector<Transform> fh;
        for (const auto& g : fs) fh.push_back(g.transform_fn());
        fr = lambda_fourier(system, fh, o);
        j["fourier"] = io::to_json(fr);
      }
      if (!j.contains("direct") && !j.contains("fourier")) throw Error("--method must be direct, fourier or both");
      emit(out, j);
      return kOk;
    }
    if (*search) {
      ConfigurationFamily fam;
      if (!family.empty())
        fam = family_from_spec(family);
      else
        fam.system = load_system(system_file, "");
      const int dim_y = fam.system.m() - fam.system.n();
      if (!exclusions_file.empty()) {
        fam.exclusions.clear();
        for (const auto& mat : io::read_json(exclusions_file)) {
          auto rows = mat.get<std::vector<std::vector<double>>>();
          Matrix mm(rows.size(), dim_y);
          for (std::size_t i = 0; i < rows.size(); ++i)
            for (int c = 0; c < dim_y; ++c) mm(i, c) = rows[i].at(c);
          fam.exclusions.push_back(ExceptionalSubspace::from_matrix(mm));
        }
      } else if (fam.exclusions.empty()) {
        fam.exclusions.push_back(ExceptionalSubspace::from_matrix(Matrix::Identity(dim_y, dim_y)));
      }
      auto E = io::read_point_set(points_file, point_tol);
      auto res = search_configurations(fam.system, E, fam.exclusions, so);
      if (out.empty() || out == "-") {
        json j = json::array();
        for (const auto& h : res.hits) j.push_back(io::to_json(h));
        std::cout << j.dump(2) << '\n';
      } else {
        io::write_hits_csv(out, res.hits);
      }
      std::cerr << res.hits.size() << " hits, " << res.evaluations << " evaluations\n";
      return res.hits.empty() ? kNegative : kOk;
    }
    if (*cepsilon) {
      auto system = load_system(system_file, family);
      auto v = json::parse(vectors_json).get<std::vector<std::vector<long>>>();
      auto r = c_epsilon_measure(system, v, eps, samples, seed);
      json j = io::to_json(r);
      j["seed"] = seed;
      j["eps"] = eps;
      emit(out, j);
      return r.estimate >= r.analytic_lower_bound - 3.0 * r.std_error ? kOk : kNegative;
    }
    if (*appendix) {
      auto rows = json::parse(p_json).get<std::vector<std::vector<double>>>();
      if (rows.empty() || rows[0].empty()) throw Error("P must be a non-empty matrix");
      Matrix P(rows.size(), rows[0].size());
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows[0].size(); ++c) P(i, c) = rows[i].at(c);
      auto chart = make_chart(P);
      LimitOptions lo;
      lo.R = trunc_R > 8.0 ? 4.0 : trunc_R;
      lo.Q_surface = quad_Q > 1000 ? 200 : quad_Q;
      RealField F = [](std::span<const double> x) {
        double s = 0.0;
        for (double xa : x) s += xa * xa;
        return std::exp(-std::numbers::pi * s);
      };
      auto table = mollified_limit_check(chart, F, split_numbers(eps_list), lo);
      json j{{"constant_CP", constant_CP(chart)}, {"limit_constant", limit_constant(chart)}, {"rows", json::array()}};
      for (const auto& r : table)
        j["rows"].push_back({{"eps", r.eps}, {"value", r.value}, {"target", r.target}, {"rel_err", r.rel_err}});
      emit(out, j);
      return kOk;
    }
    if (*pipeline) {
      PipelineOptions po;
      if (pipeline->count("--seed")) po.seed = seed;
      po.base_dir = std::filesystem::path(config_file).parent_path().string();
      po.threads = threads;
      json config;
      try {
        config = io::read_json(config_file);
      } catch (const std::exception& e) {
        throw StepError("config", e.what());
      }
      auto manifest = run_pipeline(config, out, po);
      std::cout << (std::filesystem::path(out) / "manifest.json").string() << '\n';
      return manifest.value("lambda_agreement", false) ? kOk : kNegative;
    }
  } catch (const StepError& e) {
    std::cerr << "pipeline aborted at step " << e.step() << ": " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
