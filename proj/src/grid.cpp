#include "klab/grid.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "klab/numeric.hpp"

namespace klab {

std::shared_ptr<const RadialGrid> RadialGrid::make(int dim, double R, int n) {
  if (dim < 2) throw std::invalid_argument("RadialGrid: dimension must be >= 2");
  if (!(R > 0.0)) throw std::invalid_argument("RadialGrid: radius must be positive");
  if (n < 16) throw std::invalid_argument("RadialGrid: need at least 16 nodes");
  auto g = std::make_shared<RadialGrid>();
  g->dim = dim;
  g->R = R;
  g->n = n;
  g->h = R / (n - 1);
  g->surface = 2.0 * std::exp(0.5 * dim * std::log(M_PI) - std::lgamma(0.5 * dim));
  g->r.resize(n);
  g->wleb.resize(n);
  g->wgrad.resize(n - 1);
  for (int i = 0; i < n; ++i) {
    g->r[i] = i * g->h;
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    g->wleb[i] = g->surface * g->h * w * pow_abs(g->r[i], dim - 1.0);
  }
  for (int i = 0; i + 1 < n; ++i) {
    const double rmid = 0.5 * (g->r[i] + g->r[i + 1]);
    g->wgrad[i] = g->surface * g->h * pow_abs(rmid, dim - 1.0);
  }
  return g;
}

RadialFunction::RadialFunction(GridPtr g, std::vector<double> values)
    : grid(std::move(g)), v(std::move(values)) {
  if (static_cast<int>(v.size()) != grid->n)
    throw std::invalid_argument("RadialFunction: value count does not match grid");
  enforce_boundary();
}

double grad_norm_p(const RadialFunction& u, const ProblemExponents& exps) {
  const RadialGrid& g = *u.grid;
  const double inv_h = 1.0 / g.h;
  double acc = 0.0;
  for (int i = 0; i + 1 < g.n; ++i) {
    const double d = (u.v[i + 1] - u.v[i]) * inv_h;
    acc += g.wgrad[i] * pow_abs(d, exps.p);
  }
  return acc;
}

double lebesgue_norm(const RadialFunction& u, double s) {
  if (!(s >= 1.0)) throw std::invalid_argument("lebesgue_norm: exponent must be >= 1");
  const RadialGrid& g = *u.grid;
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i) acc += g.wleb[i] * pow_abs(u.v[i], s);
  return acc;
}

EnergyBreakdown energy(const RadialFunction& u, double lambda,
                       const KirchhoffModel& model, const ProblemExponents& exps) {
  EnergyBreakdown e;
  e.gradp = grad_norm_p(u, exps);
  e.crit = lebesgue_norm(u, exps.pstar);
  e.pert = lebesgue_norm(u, exps.q) / exps.q;
  e.phi = model.mhat(e.gradp) / exps.p - e.crit / exps.pstar - lambda * e.pert;
  return e;
}

RadialFunction energy_gradient(const RadialFunction& u, double lambda,
                               const KirchhoffModel& model, const ProblemExponents& exps) {
  const RadialGrid& g = *u.grid;
  const double inv_h = 1.0 / g.h;
  RadialFunction out(u.grid);
  const double MA = model.m(grad_norm_p(u, exps));
  double prev = 0.0;  // wgrad_{i-1} |d_{i-1}|^{p-2} d_{i-1}
  for (int i = 0; i < g.n; ++i) {
    double cur = 0.0;
    if (i + 1 < g.n) {
      const double d = (u.v[i + 1] - u.v[i]) * inv_h;
      cur = g.wgrad[i] * signed_pow(d, exps.p - 1.0);
    }
    out.v[i] = MA * (prev - cur) * inv_h
             - g.wleb[i] * signed_pow(u.v[i], exps.pstar - 1.0)
             - lambda * g.wleb[i] * signed_pow(u.v[i], exps.q - 1.0);
    prev = cur;
  }
  out.v[g.n - 1] = 0.0;
  return out;
}

RadialFunction bubble(double eps, const GridPtr& grid, const ProblemExponents& exps,
                      bool normalized, double cutoff_radius) {
  if (!(eps > 0.0)) throw std::invalid_argument("bubble: eps must be positive");
  const RadialGrid& g = *grid;
  const double rc = cutoff_radius > 0.0 ? cutoff_radius : 0.25 * g.R;
  if (2.0 * rc > g.R)
    throw std::invalid_argument("bubble: cutoff needs 2 rc <= R");
  const double decay = (g.dim - exps.p) / exps.p;
  // Peak value eps^{-decay}; reject eps small enough to overflow it.
  if (-decay * std::log(eps) > 700.0)
    throw std::invalid_argument("bubble: eps below exp(-700/decay), peak overflows");

  const double pp = exps.p / (exps.p - 1.0);
  RadialFunction u(grid);
  for (int i = 0; i < g.n; ++i) {
    const double r = g.r[i];
    double phi = 0.0;
    if (r <= rc) {
      phi = 1.0;
    } else if (r < 2.0 * rc) {
      const double s = (r - rc) / rc;
      phi = 1.0 - s * s * (3.0 - 2.0 * s);  // C^1 blend, |phi'| <= 1.5/rc
    }
    u.v[i] = phi / std::pow(eps + std::pow(r, pp), decay);
  }
  u.enforce_boundary();
  if (normalized) {
    const double norm = std::pow(grad_norm_p(u, exps), 1.0 / exps.p);
    for (double& x : u.v) x /= norm;
  }
  return u;
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SplitMix64::uniform(double lo, double hi) {
  const double x = (next() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * x;
}

double SplitMix64::gaussian() {
  const double u1 = ((next() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = (next() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

RadialFunction random_bump(const GridPtr& grid, SplitMix64& rng) {
  const RadialGrid& g = *grid;
  RadialFunction u(grid);
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::fill(u.v.begin(), u.v.end(), 0.0);
    for (int k = 0; k < 3; ++k) {
      const double c = rng.uniform(0.0, 0.7 * g.R);
      const double w = rng.uniform(0.08 * g.R, 0.4 * g.R);
      const double amp = rng.uniform(0.2, 1.0);
      for (int i = 0; i < g.n; ++i) {
        const double z = (g.r[i] - c) / w;
        u.v[i] += amp * std::exp(-z * z);
      }
    }
    const double edge = u.v[g.n - 1];
    double sup = 0.0;
    for (double& x : u.v) {
      x -= edge;
      sup = std::max(sup, std::abs(x));
    }
    u.enforce_boundary();
    if (sup > 1e-8) return u;
  }
  throw std::runtime_error("random_bump: degenerate draw");
}

namespace {
std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}
}  // namespace

std::string RadialFunction::to_csv() const {
  std::string out = "r,u\n";
  for (int i = 0; i < size(); ++i) {
    out += fmt17(grid->r[i]);
    out += ',';
    out += fmt17(v[i]);
    out += '\n';
  }
  return out;
}

std::string RadialFunction::to_json() const {
  nlohmann::json j;
  j["grid"] = {{"dim", grid->dim}, {"R", grid->R}, {"n", grid->n}};
  j["values"] = v;
  return j.dump(2);
}

RadialFunction RadialFunction::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  auto grid = RadialGrid::make(j.at("grid").at("dim").get<int>(),
                               j.at("grid").at("R").get<double>(),
                               j.at("grid").at("n").get<int>());
  return RadialFunction(grid, j.at("values").get<std::vector<double>>());
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace klab
