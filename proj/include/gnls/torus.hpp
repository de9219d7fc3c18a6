#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace gnls {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Default ratio of collocation points to retained modes per axis. The
/// exponential nonlinearity has unbounded bandwidth, so this only controls
/// the size of the aliasing error.
inline constexpr double kDefaultOversampling = 4.0;

/// Integer frequency n in Z^d, d <= 2 (the unused component is zero for d=1).
using Mode = std::array<int, 2>;

inline int norm_sq(const Mode& n) { return n[0] * n[0] + n[1] * n[1]; }

/// Japanese bracket <n> = (1 + |n|^2)^{1/2}.
inline double bracket(const Mode& n) { return std::sqrt(1.0 + norm_sq(n)); }

/// Flat torus [0, 2pi)^d with a box of retained frequencies |n|_inf <= n_max
/// and a uniform collocation grid of m_grid points per axis.
class TorusGeometry {
 public:
  TorusGeometry(int dim, int n_max, int m_grid);

  /// Grid size chosen as ceil(oversampling * (2 n_max + 1)).
  static TorusGeometry with_oversampling(int dim, int n_max,
                                         double oversampling = kDefaultOversampling);

  int dim() const { return dim_; }
  int n_max() const { return n_max_; }
  int m_grid() const { return m_grid_; }
  int side() const { return 2 * n_max_ + 1; }
  std::size_t num_modes() const;
  std::size_t num_points() const;
  double oversampling() const { return double(m_grid_) / side(); }
  double volume() const;

  /// Lexicographic position of n in the coefficient box, axis 0 slowest.
  std::size_t index_of(const Mode& n) const;
  Mode mode_at(std::size_t index) const;
  bool contains(const Mode& n) const;

  bool operator==(const TorusGeometry&) const = default;

 private:
  int dim_;
  int n_max_;
  int m_grid_;
};

/// Coefficients a_n of u = sum a_n phi_n with the orthonormal basis
/// phi_n(x) = (2pi)^{-d/2} e^{i n.x}, stored over the box |n|_inf <= n_max.
class SpectralField {
 public:
  explicit SpectralField(TorusGeometry geometry);
  SpectralField(TorusGeometry geometry, std::vector<Complex> coeffs);

  const TorusGeometry& geometry() const { return geometry_; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  std::span<Complex> coeffs() { return coeffs_; }

  Complex& operator[](const Mode& n) { return coeffs_[geometry_.index_of(n)]; }
  const Complex& operator[](const Mode& n) const { return coeffs_[geometry_.index_of(n)]; }
  Complex& at(std::size_t i) { return coeffs_[i]; }
  const Complex& at(std::size_t i) const { return coeffs_[i]; }
  std::size_t size() const { return coeffs_.size(); }

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(Complex s);

 private:
  TorusGeometry geometry_;
  std::vector<Complex> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(Complex s, SpectralField a);

/// Values of a field on the collocation grid x_j = 2pi j / m_grid,
/// row-major with axis 0 slowest.
class GridField {
 public:
  explicit GridField(TorusGeometry geometry);
  GridField(TorusGeometry geometry, std::vector<Complex> values);

  const TorusGeometry& geometry() const { return geometry_; }
  std::span<const Complex> values() const { return values_; }
  std::span<Complex> values() { return values_; }
  std::size_t size() const { return values_.size(); }
  double cell_volume() const;

 private:
  TorusGeometry geometry_;
  std::vector<Complex> values_;
};

GridField to_grid(const SpectralField& u);

/// Discrete projection of grid values onto phi_n. With a cutoff, modes with
/// |n|_inf > cutoff are zeroed.
SpectralField from_grid(const GridField& g, std::optional<int> cutoff = std::nullopt);

/// Sharp projector onto |n| <= cutoff (Euclidean |n|).
SpectralField project(const SpectralField& u, double cutoff);
/// Complementary projector onto |n| > cutoff.
SpectralField project_high(const SpectralField& u, double cutoff);

using CutoffProfile = std::function<double(double)>;

/// C-infinity profile: 1 on [-1/2, 1/2], 0 outside (-1, 1).
double default_cutoff_profile(double s);

/// Multiplies a_n by profile(|n|^2 / cutoff^2).
SpectralField smooth_project(const SpectralField& u, double cutoff,
                             const CutoffProfile& profile = default_cutoff_profile);

/// Multiplies a_n by e^{-i n.shift}, i.e. u(x) -> u(x - shift).
SpectralField translate(const SpectralField& u, const std::array<double, 2>& shift);

double l2_norm(const SpectralField& u);
double sobolev_norm(const SpectralField& u, double s);
Complex inner(const SpectralField& u, const SpectralField& v);

/// Quadrature of |u|^2 on the grid.
double grid_l2_norm_sq(const GridField& g);

/// Sentinel for an infinite spectral cutoff.
inline constexpr double kInfiniteCutoff = std::numeric_limits<double>::infinity();

/// sigma_{alpha,N} = (2pi)^{-d} sum_{|n| <= N} <n>^{-alpha}, the pointwise
/// variance of the truncated Gaussian field. cutoff = kInfiniteCutoff sums
/// the full lattice series and throws std::domain_error when alpha <= d.
double sigma(double alpha, double cutoff, int dim);

/// Number of lattice points n in Z^d with |n| <= lambda.
std::int64_t weyl_count(double lambda, int dim);

/// Binary snapshot: "GNLS", version, d, n_max (u32 LE), then (re, im) LE
/// doubles in lexicographic mode order.
inline constexpr std::uint32_t kSnapshotVersion = 1;
void write_snapshot(std::ostream& out, const SpectralField& u);
SpectralField read_snapshot(std::istream& in, double oversampling = kDefaultOversampling);

}  // namespace gnls
