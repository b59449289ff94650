#include "salem/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "salem/parallel.hpp"
#include "salem/rng.hpp"
#include "salem/simd.hpp"

namespace salem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

void validate(const CantorParams& p, std::size_t N) {
  if (p.n < 1) throw Error("cantor dimension must be positive");
  if (p.M < 2) throw Error("cantor subdivision factor M must be at least 2");
  if (p.stages < 1) throw Error("cantor needs at least one stage");
  std::size_t children = ipow(static_cast<std::size_t>(p.M), p.n);
  if (p.T < 1 || static_cast<std::size_t>(p.T) > children)
    throw Error("cantor retention T must lie in [1, M^n]");
  std::size_t res = ipow(static_cast<std::size_t>(p.M), p.stages);
  if (N % res != 0)
    throw Error("M^stages = " + std::to_string(res) + " does not divide the grid size " + std::to_string(N));
}

}  // namespace

CantorMode parse_cantor_mode(const std::string& s) {
  if (s == "independent-uniform") return CantorMode::independent_uniform;
  if (s == "radial-product") return CantorMode::radial_product;
  throw Error("unknown cantor mode '" + s + "'");
}

std::string to_string(CantorMode mode) {
  return mode == CantorMode::radial_product ? "radial-product" : "independent-uniform";
}

std::vector<std::size_t> cantor_cells(const CantorParams& p) {
  const int n = p.n;
  const std::size_t M = static_cast<std::size_t>(p.M);
  const std::size_t children = ipow(M, n);
  std::mt19937_64 gen(p.seed);
  std::vector<std::size_t> retained{0};
  std::size_t res = 1;
  std::vector<std::size_t> pidx, didx, order(children);
  for (int stage = 0; stage < p.stages; ++stage) {
    const std::size_t next_res = res * M;
    std::vector<std::size_t> next;
    next.reserve(retained.size() * static_cast<std::size_t>(p.T));
    for (std::size_t parent : retained) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (int i = 0; i < p.T; ++i) {
        std::size_t j = static_cast<std::size_t>(i) + bounded_draw(gen, children - static_cast<std::size_t>(i));
        std::swap(order[i], order[j]);
      }
      unravel(parent, n, res, pidx);
      for (int i = 0; i < p.T; ++i) {
        unravel(order[i], n, M, didx);
        std::size_t flat = 0;
        for (int a = 0; a < n; ++a) flat = flat * next_res + pidx[a] * M + didx[a];
        next.push_back(flat);
      }
    }
    std::sort(next.begin(), next.end());
    retained.swap(next);
    res = next_res;
  }
  return retained;
}

GridMeasure gen_random_cantor(const CantorParams& p, std::size_t N) {
  if (p.mode == CantorMode::radial_product) return gen_radial_product(p, p.n, N);
  validate(p, N);
  if (!power_of_two(N)) throw Error("grid size must be a power of two");
  const int n = p.n;
  const std::size_t res = ipow(static_cast<std::size_t>(p.M), p.stages);
  const std::size_t sub = N / res;
  auto cells = cantor_cells(p);
  const std::size_t per_cell = ipow(sub, n);
  const double mass = 1.0 / (static_cast<double>(cells.size()) * static_cast<double>(per_cell));
  std::vector<double> w(ipow(N, n), 0.0);
  std::vector<std::size_t> cidx, sidx;
  for (std::size_t c : cells) {
    unravel(c, n, res, cidx);
    for (std::size_t s = 0; s < per_cell; ++s) {
      unravel(s, n, sub, sidx);
      std::size_t flat = 0;
      for (int a = 0; a < n; ++a) flat = flat * N + cidx[a] * sub + sidx[a];
      w[flat] = mass;
    }
  }
  return GridMeasure::normalized(n, N, std::move(w));
}

GridMeasure gen_radial_product(const CantorParams& radial, int n, std::size_t N, const RadialOptions& options) {
  if (n < 2) throw Error("radial product measures need n >= 2");
  CantorParams line = radial;
  line.n = 1;
  line.mode = CantorMode::independent_uniform;
  const std::size_t res = ipow(static_cast<std::size_t>(line.M), line.stages);
  validate(line, res);
  if (!power_of_two(N) || N < 4) throw Error("grid size must be a power of two >= 4");
  const auto cells = cantor_cells(line);
  const int rs = std::max(1, options.radial_samples);
  const int K = options.angular > 0 ? options.angular : static_cast<int>(2 * N);
  const int angles = n - 1;

  // first-orthant angular nodes and surface weights
  std::vector<std::vector<double>> dirs;
  std::vector<double> dir_w;
  const std::size_t nodes = ipow(static_cast<std::size_t>(K), angles);
  std::vector<std::size_t> aidx;
  std::vector<double> phi(angles), u(n);
  for (std::size_t i = 0; i < nodes; ++i) {
    unravel(i, angles, static_cast<std::size_t>(K), aidx);
    double w = 1.0;
    for (int a = 0; a < angles; ++a) {
      phi[a] = (static_cast<double>(aidx[a]) + 0.5) * (std::numbers::pi / 2.0) / K;
      w *= std::pow(std::sin(phi[a]), angles - 1 - a);
    }
    double s = 1.0;
    for (int a = 0; a < angles; ++a) {
      u[a] = s * std::cos(phi[a]);
      s *= std::sin(phi[a]);
    }
    u[n - 1] = s;
    dirs.push_back(u);
    dir_w.push_back(w);
  }
  double wsum = 0.0;
  for (double w : dir_w) wsum += w;

  const std::size_t half = N / 2;
  const double cell_mass = 1.0 / static_cast<double>(cells.size());
  std::vector<double> weights(ipow(N, n), 0.0);
  std::vector<std::size_t> plus(n), minus(n);
  for (std::size_t c : cells) {
    for (int s = 0; s < rs; ++s) {
      double t = (static_cast<double>(c) + (s + 0.5) / rs) / static_cast<double>(res);
      double rho = 0.5 * (0.5 + 0.5 * t);
      for (std::size_t d = 0; d < dirs.size(); ++d) {
        double mass = cell_mass / rs * dir_w[d] / wsum;
        for (int a = 0; a < n; ++a) {
          auto k = static_cast<std::size_t>(std::floor(rho * dirs[d][a] * static_cast<double>(N)));
          k = std::min(k, half - 1);
          plus[a] = half + k;
          minus[a] = half - 1 - k;
        }
        for (unsigned signs = 0; signs < (1u << n); ++signs) {
          std::size_t flat = 0;
          for (int a = 0; a < n; ++a) flat = flat * N + (((signs >> a) & 1u) ? minus[a] : plus[a]);
          weights[flat] += mass;
        }
      }
    }
  }
  return GridMeasure::normalized(n, N, std::move(weights));
}

FourierSample fourier_transform(const GridMeasure& measure, double xi_max, int oversample) {
  const int n = measure.n();
  const std::size_t N = measure.N();
  if (oversample < 1) throw Error("oversample factor must be >= 1");
  if (!(xi_max >= 0.0) || xi_max > static_cast<double>(N) / 2.0)
    throw Error("max frequency " + std::to_string(xi_max) + " exceeds N/2 = " + std::to_string(N / 2));
  FourierSample out;
  out.n = n;
  out.spacing = 1.0 / oversample;
  out.K = static_cast<int>(std::floor(xi_max * oversample + 1e-9));
  const std::size_t F = out.side();
  const double h = 1.0 / static_cast<double>(N);

  auto line_freq = [&](std::size_t k) { return out.spacing * (static_cast<double>(k) - out.K); };

  // last axis from real data
  std::size_t pre = ipow(N, n - 1);
  std::vector<cplx> cur(pre * F);
  {
    const auto& w = measure.weights();
    parallel_for(pre, [&](std::size_t p) {
      std::span<const double> line(w.data() + p * N, N);
      for (std::size_t k = 0; k < F; ++k) {
        double xi = line_freq(k);
        cplx off{std::cos(-kTwoPi * 0.5 * h * xi), std::sin(-kTwoPi * 0.5 * h * xi)};
        cur[p * F + k] = off * simd::phase_sum(line, -kTwoPi * h * xi);
      }
    });
  }
  // remaining axes; layout (pre, N, post) -> (pre, F, post)
  std::size_t post = F;
  for (int axis = n - 2; axis >= 0; --axis) {
    pre /= N;
    std::vector<cplx> next(pre * F * post);
    parallel_for(pre * post, [&](std::size_t job) {
      std::size_t p = job / post, q = job % post;
      std::vector<cplx> line(N);
      for (std::size_t c = 0; c < N; ++c) line[c] = cur[(p * N + c) * post + q];
      for (std::size_t k = 0; k < F; ++k) {
        double xi = line_freq(k);
        cplx off{std::cos(-kTwoPi * 0.5 * h * xi), std::sin(-kTwoPi * 0.5 * h * xi)};
        next[(p * F + k) * post + q] = off * simd::phase_sum(std::span<const cplx>(line), -kTwoPi * h * xi);
      }
    });
    cur.swap(next);
    post *= F;
  }
  const std::size_t total = cur.size();
  const std::size_t centre = (total - 1) / 2;
  for (std::size_t i = 0; i < centre; ++i) cur[i] = std::conj(cur[total - 1 - i]);
  cur[centre] = {cur[centre].real(), 0.0};
  out.values = std::move(cur);
  return out;
}

BallConstant ball_condition_constant(const GridMeasure& measure, double alpha) {
  const int n = measure.n();
  if (!(alpha > 0.0) || alpha > n) throw Error("alpha must lie in (0, n]");
  const std::size_t N = measure.N();
  const auto& w = measure.weights();
  // prefix sums along the last axis, one extra slot per row
  const std::size_t rows = w.size() / N;
  std::vector<double> prefix(rows * (N + 1), 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < N; ++c) prefix[r * (N + 1) + c + 1] = prefix[r * (N + 1) + c] + w[r * N + c];

  int levels = 0;
  while ((std::size_t{1} << levels) < N) ++levels;
  BallConstant out;
  const auto& support = measure.support();
  std::vector<std::size_t> xi;
  for (int j = 1; j <= levels; ++j) {
    const long rho = static_cast<long>(N >> j);
    const long rho2 = rho * rho;
    const double radius = std::ldexp(1.0, -j);
    std::vector<double> per_point(support.size(), 0.0);
    parallel_for(support.size(), [&](std::size_t s) {
      std::vector<std::size_t> x;
      unravel(support[s], n, N, x);
      const int lead = n - 1;
      std::vector<long> d(lead, -(rho - 1));
      double mass = 0.0;
      for (;;) {
        long dist2 = 0;
        bool inside = true;
        std::size_t row = 0;
        for (int a = 0; a < lead; ++a) {
          long c = static_cast<long>(x[a]) + d[a];
          if (c < 0 || c >= static_cast<long>(N)) inside = false;
          dist2 += d[a] * d[a];
          row = row * N + static_cast<std::size_t>(std::max(c, 0L));
        }
        if (inside && dist2 < rho2) {
          long rem = rho2 - dist2 - 1;
          long half = static_cast<long>(std::sqrt(static_cast<double>(rem)));
          while (half * half > rem) --half;
          while ((half + 1) * (half + 1) <= rem) ++half;
          long lo = std::max(0L, static_cast<long>(x[n - 1]) - half);
          long hi = std::min(static_cast<long>(N) - 1, static_cast<long>(x[n - 1]) + half);
          mass += prefix[row * (N + 1) + hi + 1] - prefix[row * (N + 1) + lo];
        }
        int a = lead - 1;
        while (a >= 0 && d[a] == rho - 1) {
          d[a] = -(rho - 1);
          --a;
        }
        if (a < 0) break;
        ++d[a];
      }
      per_point[s] = mass;
    });
    double best = 0.0;
    for (double m : per_point) best = std::max(best, m);
    BallScale sc;
    sc.radius = radius;
    sc.max_ratio = best / std::pow(radius, alpha);
    sc.running_sup = std::max(sc.max_ratio, out.scales.empty() ? 0.0 : out.scales.back().running_sup);
    if (sc.max_ratio > out.C) {
      out.C = sc.max_ratio;
      out.radius_at_max = radius;
    }
    out.scales.push_back(sc);
  }
  return out;
}

DecayFit decay_exponent_fit(const FourierSample& sample, double lo, double hi) {
  if (!(lo >= 1.0)) throw Error("decay window must start at |xi| >= 1");
  if (!(hi > lo)) throw Error("decay window is empty");
  if (hi > sample.max_frequency() * (1.0 + 1e-12))
    throw Error("decay window exceeds the sampled range " + std::to_string(sample.max_frequency()));
  DecayFit fit;
  fit.window_lo = lo;
  fit.window_hi = hi;
  for (double a = lo; a < hi; a *= 2.0) fit.annuli.push_back({a, std::min(2.0 * a, hi), 0.0, 0});
  std::vector<double> norms(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double r = sample.norm(i);
    norms[i] = r;
    if (r < lo || r > hi) continue;
    std::size_t b = static_cast<std::size_t>(std::floor(std::log2(r / lo)));
    b = std::min(b, fit.annuli.size() - 1);
    while (b > 0 && r < fit.annuli[b].lo) --b;
    while (b + 1 < fit.annuli.size() && r >= fit.annuli[b].hi) ++b;
    auto& an = fit.annuli[b];
    an.max_abs = std::max(an.max_abs, std::abs(sample.values[i]));
    ++an.samples;
  }
  std::vector<double> xs, ys;
  for (const auto& an : fit.annuli) {
    if (an.samples == 0) continue;
    xs.push_back(0.5 * std::log(an.lo * an.hi));
    ys.push_back(std::log(std::max(an.max_abs, 1e-300)));
  }
  if (xs.size() < 3)
    throw Error("decay window holds " + std::to_string(xs.size()) + " populated dyadic annuli, need at least 3");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  double slope = sxy / sxx;
  fit.beta_hat = -2.0 * slope;
  if (fit.beta_hat < 0.0) {
    fit.beta_hat = 0.0;
    fit.clamped = true;
  }
  std::vector<double> scaled;
  for (std::size_t i = 0; i < sample.size(); ++i)
    if (norms[i] >= lo && norms[i] <= hi)
      scaled.push_back(std::abs(sample.values[i]) * std::pow(norms[i], fit.beta_hat / 2.0));
  std::sort(scaled.begin(), scaled.end());
  std::size_t rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(scaled.size())));
  fit.C_hat = scaled[std::max<std::size_t>(rank, 1) - 1];
  return fit;
}

double Mollifier::transform_1d(double xi) const {
  const double h = 1.0 / static_cast<double>(grid);
  double s = taps[half];
  for (int t = 1; t <= half; ++t) s += 2.0 * taps[half + t] * std::cos(kTwoPi * t * h * xi);
  return s;
}

double Mollifier::transform(std::span<const double> xi) const {
  double p = 1.0;
  for (double x : xi) p *= transform_1d(x);
  return p;
}

double Mollifier::sup_unit(int n) const {
  double peak = *std::max_element(taps.begin(), taps.end());
  double cell = static_cast<double>(scale) / static_cast<double>(grid);
  return std::pow(peak / cell, n);
}

Mollifier make_mollifier(std::size_t grid, int n_moll) {
  if (n_moll < 2) throw Error("mollifier scale must be >= 2");
  const double L = static_cast<double>(grid) / (2.0 * n_moll);
  int half = static_cast<int>(std::ceil(L)) - 1;
  if (half < 1)
    throw Error("mollifier support below one cell at N_moll = " + std::to_string(n_moll) +
                "; use a grid with at least " + std::to_string(4 * n_moll) + " cells per axis");
  Mollifier k;
  k.grid = grid;
  k.scale = n_moll;
  k.half = half;
  k.taps.resize(2 * half + 1);
  double sum = 0.0;
  for (int t = -half; t <= half; ++t) {
    double u = t / L;
    double v = std::exp(-1.0 / (1.0 - u * u));
    k.taps[t + half] = v;
    sum += v;
  }
  for (double& v : k.taps) v /= sum;
  return k;
}

MollifySplit mollify_split(const GridMeasure& measure, int n_moll, double xi_max, int oversample) {
  const int n = measure.n();
  const std::size_t N = measure.N();
  Mollifier kernel = make_mollifier(N, n_moll);
  const std::size_t H = static_cast<std::size_t>(kernel.half);
  const std::size_t E = N + 2 * H;
  std::vector<double> cur(ipow(E, n), 0.0);
  {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < measure.cells(); ++i) {
      double v = measure.weights()[i];
      if (v == 0.0) continue;
      unravel(i, n, N, idx);
      std::size_t flat = 0;
      for (int a = 0; a < n; ++a) flat = flat * E + idx[a] + H;
      cur[flat] = v;
    }
  }
  for (int axis = 0; axis < n; ++axis) {
    const std::size_t stride = ipow(E, n - 1 - axis);
    const std::size_t lines = cur.size() / E;
    std::vector<double> next(cur.size());
    parallel_for(lines, [&](std::size_t line) {
      std::size_t outer = line / stride, inner = line % stride;
      std::size_t base = outer * E * stride + inner;
      std::vector<double> padded(E + 2 * H, 0.0), out(E);
      bool any = false;
      for (std::size_t c = 0; c < E; ++c) {
        padded[c + H] = cur[base + c * stride];
        any = any || padded[c + H] != 0.0;
      }
      if (!any) return;
      simd::correlate(padded, kernel.taps, out);
      for (std::size_t c = 0; c < E; ++c) next[base + c * stride] = out[c];
    });
    cur.swap(next);
  }
  const double h = 1.0 / static_cast<double>(N);
  Box dom;
  dom.lo.assign(n, -static_cast<double>(H) * h);
  dom.hi.assign(n, 1.0 + static_cast<double>(H) * h);
  std::vector<double> density = cur;
  const double inv_vol = std::pow(static_cast<double>(N), n);
  for (double& v : density) v *= inv_vol;

  MollifySplit out{GridFunction(n, E, dom, std::move(density)), fourier_transform(measure, xi_max, oversample), kernel,
                   std::move(cur)};
  for (std::size_t i = 0; i < out.mu2_hat.size(); ++i) {
    auto xi = out.mu2_hat.freq(i);
    out.mu2_hat.values[i] *= 1.0 - kernel.transform(xi);
  }
  return out;
}

Transform mollified_part(const GridMeasure& measure, const Mollifier& kernel) {
  return [measure, kernel](std::span<const double> xi) { return measure.transform(xi) * kernel.transform(xi); };
}

Transform remainder_part(const GridMeasure& measure, const Mollifier& kernel) {
  return [measure, kernel](std::span<const double> xi) { return measure.transform(xi) * (1.0 - kernel.transform(xi)); };
}

}  // namespace salem
