#ifndef KLAB_GRID_HPP
#define KLAB_GRID_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "klab/model.hpp"

namespace klab {

/// Uniform radial grid on [0, R] with the surface factor of the unit sphere
/// baked into the quadrature weights.
struct RadialGrid {
  int dim = 4;        // space dimension N
  double R = 1.0;     // ball radius
  int n = 201;        // node count, boundary node carries the Dirichlet zero
  double h = 0.0;     // R / (n - 1)
  double surface = 0.0;  // |S^{N-1}| = 2 pi^{N/2} / Gamma(N/2)

  std::vector<double> r;      // nodes r_i = i h
  std::vector<double> wleb;   // trapezoid weights  surface * h * w_i * r_i^{N-1}
  std::vector<double> wgrad;  // midpoint weights   surface * h * rmid_i^{N-1}

  static std::shared_ptr<const RadialGrid> make(int dim, double R, int n);
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Nodal values of a radial function with zero boundary value.
struct RadialFunction {
  GridPtr grid;
  std::vector<double> v;

  RadialFunction() = default;
  explicit RadialFunction(GridPtr g) : grid(std::move(g)), v(grid->n, 0.0) {}
  RadialFunction(GridPtr g, std::vector<double> values);

  int size() const { return static_cast<int>(v.size()); }
  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }

  void enforce_boundary() { if (!v.empty()) v.back() = 0.0; }

  std::string to_csv() const;                     // columns r,u
  std::string to_json() const;                    // grid metadata + values
  static RadialFunction from_json(const std::string& text);
};

struct EnergyBreakdown {
  double gradp = 0.0;  // ||u||^p
  double crit = 0.0;   // ||u||_{pstar}^{pstar}
  double pert = 0.0;   // integral of F(u) = |u|^q / q
  double phi = 0.0;    // (1/p) Mhat(gradp) - crit/pstar - lambda * pert
};

/// ||u||^p by midpoint sampling of the difference quotient.
double grad_norm_p(const RadialFunction& u, const ProblemExponents& exps);

/// Integral of |u|^s over the ball by trapezoidal quadrature.
double lebesgue_norm(const RadialFunction& u, double s);

EnergyBreakdown energy(const RadialFunction& u, double lambda,
                       const KirchhoffModel& model, const ProblemExponents& exps);

/// Exact gradient of the discrete energy with respect to nodal values;
/// the boundary entry is forced to zero.
RadialFunction energy_gradient(const RadialFunction& u, double lambda,
                               const KirchhoffModel& model, const ProblemExponents& exps);

/// Extremal-profile bubble v_eps(r) = cutoff(r) / (eps + r^{p/(p-1)})^{(N-p)/p}
/// with a C^1 cubic blend cutoff equal to 1 on [0, rc] and 0 beyond 2 rc.
/// With normalized = true returns v_eps / ||v_eps||.
RadialFunction bubble(double eps, const GridPtr& grid, const ProblemExponents& exps,
                      bool normalized, double cutoff_radius = -1.0);

/// Smooth random profile: sum of three Gaussian-like radial humps clipped to
/// the boundary.  Deterministic in the generator state.
class SplitMix64;
RadialFunction random_bump(const GridPtr& grid, SplitMix64& rng);

/// Deterministic 64-bit generator so that emitted artifacts are reproducible
/// byte-for-byte across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform(double lo, double hi);   // in [lo, hi)
  double gaussian();                      // Box-Muller on uniforms
 private:
  std::uint64_t state_;
};

// In-place vector helpers shared by the solvers.
void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y);
double dot(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace klab

#endif  // KLAB_GRID_HPP
