#include "salem/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <functional>

namespace salem {

namespace fs = std::filesystem;
using io::json;

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || base.empty()) return path.string();
  return (fs::path(base) / path).string();
}

}  // namespace

GridFunction test_function(const json& spec, int n) {
  const std::string type = spec.value("type", "");
  const int grid = spec.value("grid", 64);
  if (type == "ball-indicator") {
    auto c = spec.at("center").get<std::vector<double>>();
    const double r = spec.at("radius").get<double>();
    if (static_cast<int>(c.size()) != n) throw Error("ball centre has the wrong dimension");
    Box box{c, c};
    for (int a = 0; a < n; ++a) {
      box.lo[a] -= r;
      box.hi[a] += r;
    }
    return GridFunction::sample(n, grid, box, [c, r](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) s += (x[a] - c[a]) * (x[a] - c[a]);
      return s < r * r ? 1.0 : 0.0;
    });
  }
  if (type == "bump") {
    auto lo = spec.value("lo", 0.1), hi = spec.value("hi", 0.9);
    Box box{std::vector<double>(n, lo), std::vector<double>(n, hi)};
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    return GridFunction::sample(n, grid, box, [mid, half](std::span<const double> x) {
      double v = 1.0;
      for (double xa : x) {
        double u = (xa - mid) / half;
        v *= std::fabs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
      }
      return v;
    });
  }
  if (type == "indicator") return GridFunction(n, grid, Box::unit(n), std::vector<double>(ipow(grid, n), 1.0));
  throw Error("unknown function type \"" + type + "\"");
}

namespace {

std::vector<ExceptionalSubspace> exclusions_from(const json& cfg, int dim_y) {
  std::vector<ExceptionalSubspace> out;
  if (!cfg.contains("exclusions")) {
    out.push_back(ExceptionalSubspace::from_matrix(Matrix::Identity(dim_y, dim_y)));
    return out;
  }
  for (const auto& mat : cfg["exclusions"]) {
    auto rows = mat.get<std::vector<std::vector<double>>>();
    Matrix m(rows.size(), dim_y);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(rows[i].size()) != dim_y) throw Error("exclusion matrix has the wrong width");
      for (int c = 0; c < dim_y; ++c) m(i, c) = rows[i][c];
    }
    out.push_back(ExceptionalSubspace::from_matrix(m));
  }
  return out;
}

}  // namespace

json run_pipeline(const json& config, const std::string& out_dir, const PipelineOptions& opt) {
  if (!config.is_object()) throw StepError("config", "config must be a JSON object");
  const std::uint64_t seed = opt.seed ? *opt.seed : config.value("seed", std::uint64_t{0});
  fs::create_directories(out_dir);
  auto out = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

  json manifest{{"name", config.value("name", "")}, {"seed", seed}, {"config_sha256", io::sha256_hex(config.dump())}};
  json steps = json::array();
  auto run_step = [&](const std::string& name, const std::function<json()>& body) {
    json entry;
    try {
      entry = body();
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(name, e.what());
    }
    entry["step"] = name;
    steps.push_back(entry);
    return entry;
  };
  auto outputs = [&](std::initializer_list<std::string> files) {
    json o = json::object();
    for (const auto& f : files) o[f] = io::sha256_file(out(f));
    return o;
  };

  MatrixSystem system;
  try {
    if (config.contains("system_file"))
      system = io::read_system(resolve(opt.base_dir, config["system_file"].get<std::string>()));
    else
      system = io::system_from_json(config.at("system"));
  } catch (const std::exception& e) {
    throw StepError("config", e.what());
  }
  manifest["system"] = io::system_to_json(system);

  GridMeasure measure;
  run_step("gen-measure", [&] {
    json entry;
    if (config.contains("measure_file")) {
      const std::string path = resolve(opt.base_dir, config["measure_file"].get<std::string>());
      if (!fs::exists(path)) throw Error("measure file " + path + " does not exist");
      measure = io::read_measure(path);
      entry["source"] = "file";
    } else {
      const json& g = config.at("generator");
      CantorParams p;
      p.n = g.value("n", 1);
      p.M = g.value("M", 4);
      p.T = g.value("T", 2);
      p.stages = g.value("stages", 4);
      p.mode = parse_cantor_mode(g.value("mode", "independent-uniform"));
      p.seed = seed;
      const std::size_t N = g.value("N", ipow(p.M, p.stages));
      measure = gen_random_cantor(p, N);
      entry["source"] = "generator";
      entry["params"] = {{"n", p.n}, {"M", p.M}, {"T", p.T}, {"stages", p.stages}, {"mode", to_string(p.mode)}, {"N", N}};
    }
    entry["seed"] = seed;
    entry["support_cells"] = measure.support().size();
    io::write_measure(out("measure.bin"), measure);
    entry["outputs"] = outputs({"measure.bin"});
    return entry;
  });

  const json fcfg = config.value("fourier", json::object());
  const double xi_max = fcfg.value("xi_max", 0.5 * static_cast<double>(measure.N()));
  FourierSample sample;
  run_step("fourier", [&] {
    sample = fourier_transform(measure, xi_max, fcfg.value("oversample", 1));
    io::write_fourier_csv(out("fourier.csv"), sample);
    return json{{"xi_max", xi_max}, {"points", sample.size()}, {"outputs", outputs({"fourier.csv"})}};
  });

  run_step("decay-fit", [&] {
    const json dcfg = config.value("decay_fit", json::object());
    auto window = dcfg.value("window", std::vector<double>{8.0, xi_max});
    if (window.size() != 2) throw Error("decay window needs two entries");
    auto fit = decay_exponent_fit(sample, window[0], window[1]);
    json report{{"fit", io::to_json(fit)}};
    if (dcfg.contains("alpha")) report["ball"] = io::to_json(ball_condition_constant(measure, dcfg["alpha"].get<double>()));
    io::write_json(out("decay_fit.json"), report);
    return json{{"beta_hat", fit.beta_hat}, {"C_hat", fit.C_hat}, {"outputs", outputs({"decay_fit.json"})}};
  });

  MollifySplit split;
  const json mcfg = config.value("mollify", json::object());
  run_step("mollify", [&] {
    split = mollify_split(measure, mcfg.value("n_moll", 8), xi_max);
    const auto& mu1 = split.mu1;
    io::write_json(out("mu1.json"), json{{"n", mu1.n()},
                                          {"N", mu1.N()},
                                          {"domain", {{"lo", mu1.domain().lo}, {"hi", mu1.domain().hi}}},
                                          {"values", mu1.values()}});
    io::write_fourier_csv(out("mu2_hat.csv"), split.mu2_hat);
    return json{{"n_moll", split.kernel.scale},
                {"density_sup", mu1.sup()},
                {"mass", mu1.integral()},
                {"outputs", outputs({"mu1.json", "mu2_hat.csv"})}};
  });

  bool agreement = false;
  run_step("lambda", [&] {
    const json lcfg = config.value("lambda", json::object());
    std::vector<GridFunction> f;
    if (lcfg.contains("function")) {
      GridFunction g = test_function(lcfg["function"], system.n());
      f.assign(system.k(), g);
    } else {
      if (measure.n() != system.n()) throw Error("measure dimension does not match the system");
      f.assign(system.k(), split.mu1);
    }
    DirectOptions d;
    d.grid = lcfg.value("grid", 256);
    d.seed = seed;
    d.threads = opt.threads;
    auto direct = lambda_direct(system, f, d);
    FourierOptions fo;
    fo.R = lcfg.value("R", 64.0);
    fo.Q = lcfg.value("Q", 4096);
    fo.samples = lcfg.value("samples", std::size_t{1} << 20);
    fo.seed = seed;
    fo.threads = opt.threads;
    std::vector<Transform> fh;
    for (const auto& g : f) fh.push_back(g.transform_fn());
    auto fourier = lambda_fourier(system, fh, fo);
    const double rel_tol = lcfg.value("rel_tol", 0.05), abs_tol = lcfg.value("abs_tol", 0.0);
    const double diff = std::fabs(fourier.value - direct.value);
    // A divergent Fourier side is only acceptable when both truncations are within abs_tol of zero.
    const bool settled = !fourier.divergent() ||
                         std::max(std::fabs(fourier.value), std::fabs(fourier.half_value)) <= abs_tol;
    agreement = std::isfinite(diff) && settled &&
                diff <= rel_tol * std::max(std::fabs(direct.value), std::fabs(fourier.value)) + abs_tol;
    json report{{"direct", io::to_json(direct)}, {"fourier", io::to_json(fourier)}, {"agreement", agreement}};
    io::write_json(out("lambda.json"), report);
    return json{{"direct", io::format_double(direct.value)},
                {"fourier", io::format_double(fourier.value)},
                {"agreement", agreement},
                {"seed", seed},
                {"outputs", outputs({"lambda.json"})}};
  });

  run_step("search", [&] {
    const json scfg = config.value("search", json::object());
    if (!system.identity_form()) {
      io::write_hits_csv(out("hits.csv"), {});
      return json{{"status", "skipped"}, {"reason", "configuration search needs an identity-form system"},
                  {"outputs", outputs({"hits.csv"})}};
    }
    if (measure.n() != system.n()) throw Error("measure dimension does not match the system");
    PointSet E = PointSet::from_measure(measure, scfg.value("tol", 0.0));
    const int dim_y = system.m() - system.n();
    auto excl = exclusions_from(scfg, dim_y);
    SearchOptions so;
    so.y_steps = scfg.value("y_steps", 8);
    so.exclusion_threshold = scfg.value("exclusion_threshold", -1.0);
    so.max_hits = scfg.value("max_hits", std::size_t{0});
    so.threads = opt.threads;
    auto res = search_configurations(system, E, excl, so);
    io::write_hits_csv(out("hits.csv"), res.hits);
    return json{{"status", "ok"},
                {"hits", res.hits.size()},
                {"evaluations", res.evaluations},
                {"truncated", res.truncated},
                {"outputs", outputs({"hits.csv"})}};
  });

  manifest["steps"] = steps;
  manifest["lambda_agreement"] = agreement;
  io::write_json(out("manifest.json"), manifest);
  return manifest;
}

}  // namespace salem
