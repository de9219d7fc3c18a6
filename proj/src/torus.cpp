#include "gnls/torus.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace gnls {

// ---------------------------------------------------------------------------
// Geometry

TorusGeometry::TorusGeometry(int dim, int n_max, int m_grid)
    : dim_(dim), n_max_(n_max), m_grid_(m_grid) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("TorusGeometry: dim must be 1 or 2");
  if (n_max < 0) throw std::invalid_argument("TorusGeometry: n_max must be >= 0");
  if (m_grid < 2 * n_max + 1)
    throw std::invalid_argument("TorusGeometry: m_grid must be >= 2 n_max + 1");
}

TorusGeometry TorusGeometry::with_oversampling(int dim, int n_max, double oversampling) {
  if (!(oversampling >= 1.0))
    throw std::invalid_argument("TorusGeometry: oversampling must be >= 1");
  const int side = 2 * n_max + 1;
  const int m = static_cast<int>(std::ceil(oversampling * side - 1e-9));
  return TorusGeometry(dim, n_max, std::max(m, side));
}

std::size_t TorusGeometry::num_modes() const {
  const auto s = static_cast<std::size_t>(side());
  return dim_ == 1 ? s : s * s;
}

std::size_t TorusGeometry::num_points() const {
  const auto m = static_cast<std::size_t>(m_grid_);
  return dim_ == 1 ? m : m * m;
}

double TorusGeometry::volume() const { return std::pow(kTwoPi, dim_); }

std::size_t TorusGeometry::index_of(const Mode& n) const {
  if (dim_ == 1) return static_cast<std::size_t>(n[0] + n_max_);
  return static_cast<std::size_t>(n[0] + n_max_) * side() + static_cast<std::size_t>(n[1] + n_max_);
}

Mode TorusGeometry::mode_at(std::size_t index) const {
  if (dim_ == 1) return {static_cast<int>(index) - n_max_, 0};
  const auto s = static_cast<std::size_t>(side());
  return {static_cast<int>(index / s) - n_max_, static_cast<int>(index % s) - n_max_};
}

bool TorusGeometry::contains(const Mode& n) const {
  if (std::abs(n[0]) > n_max_) return false;
  return dim_ == 1 ? n[1] == 0 : std::abs(n[1]) <= n_max_;
}

// ---------------------------------------------------------------------------
// Fields

SpectralField::SpectralField(TorusGeometry geometry)
    : geometry_(geometry), coeffs_(geometry.num_modes()) {}

SpectralField::SpectralField(TorusGeometry geometry, std::vector<Complex> coeffs)
    : geometry_(geometry), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != geometry_.num_modes())
    throw std::invalid_argument("SpectralField: coefficient count does not match geometry");
}

static void require_same(const TorusGeometry& a, const TorusGeometry& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": mismatched geometry");
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same(geometry_, other.geometry_, "SpectralField::operator+=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same(geometry_, other.geometry_, "SpectralField::operator-=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(Complex s, SpectralField a) { return a *= s; }

GridField::GridField(TorusGeometry geometry)
    : geometry_(geometry), values_(geometry.num_points()) {}

GridField::GridField(TorusGeometry geometry, std::vector<Complex> values)
    : geometry_(geometry), values_(std::move(values)) {
  if (values_.size() != geometry_.num_points())
    throw std::invalid_argument("GridField: value count does not match geometry");
}

double GridField::cell_volume() const {
  return std::pow(kTwoPi / geometry_.m_grid(), geometry_.dim());
}

// ---------------------------------------------------------------------------
// Transforms

namespace {

std::size_t grid_slot(const TorusGeometry& g, const Mode& n) {
  const int m = g.m_grid();
  const auto wrap = [m](int k) { return static_cast<std::size_t>(((k % m) + m) % m); };
  if (g.dim() == 1) return wrap(n[0]);
  return wrap(n[0]) * static_cast<std::size_t>(m) + wrap(n[1]);
}

}  // namespace

GridField to_grid(const SpectralField& u) {
  const auto& g = u.geometry();
  GridField out(g);
  auto values = out.values();
  for (std::size_t i = 0; i < u.size(); ++i) values[grid_slot(g, g.mode_at(i))] = u.at(i);
  detail::fft_inplace(values, g.dim(), g.m_grid(), detail::FftDirection::backward);
  const double scale = std::pow(kTwoPi, -0.5 * g.dim());
  for (auto& v : values) v *= scale;
  return out;
}

SpectralField from_grid(const GridField& grid, std::optional<int> cutoff) {
  const auto& g = grid.geometry();
  std::vector<Complex> work(grid.values().begin(), grid.values().end());
  detail::fft_inplace(work, g.dim(), g.m_grid(), detail::FftDirection::forward);
  const double scale = std::pow(kTwoPi, 0.5 * g.dim()) / static_cast<double>(g.num_points());
  SpectralField u(g);
  const int keep = cutoff ? *cutoff : g.n_max();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Mode n = g.mode_at(i);
    if (std::abs(n[0]) > keep || std::abs(n[1]) > keep) continue;
    u.at(i) = work[grid_slot(g, n)] * scale;
  }
  return u;
}

// ---------------------------------------------------------------------------
// Projectors and norms

SpectralField project(const SpectralField& u, double cutoff) {
  if (cutoff < 0) throw std::invalid_argument("project: cutoff must be >= 0");
  SpectralField out = u;
  const double c2 = cutoff * cutoff;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (norm_sq(u.geometry().mode_at(i)) > c2) out.at(i) = 0.0;
  return out;
}

SpectralField project_high(const SpectralField& u, double cutoff) {
  SpectralField out = u;
  const double c2 = cutoff * cutoff;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (norm_sq(u.geometry().mode_at(i)) <= c2) out.at(i) = 0.0;
  return out;
}

double default_cutoff_profile(double s) {
  const double a = std::abs(s);
  if (a <= 0.5) return 1.0;
  if (a >= 1.0) return 0.0;
  const auto psi = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
  const double t = (1.0 - a) / 0.5;
  return psi(t) / (psi(t) + psi(1.0 - t));
}

SpectralField smooth_project(const SpectralField& u, double cutoff, const CutoffProfile& profile) {
  if (!(cutoff > 0)) throw std::invalid_argument("smooth_project: cutoff must be > 0");
  SpectralField out = u;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.at(i) *= profile(norm_sq(u.geometry().mode_at(i)) / (cutoff * cutoff));
  return out;
}

SpectralField translate(const SpectralField& u, const std::array<double, 2>& shift) {
  SpectralField out = u;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Mode n = u.geometry().mode_at(i);
    out.at(i) *= std::polar(1.0, -(n[0] * shift[0] + n[1] * shift[1]));
  }
  return out;
}

double l2_norm(const SpectralField& u) { return sobolev_norm(u, 0.0); }

double sobolev_norm(const SpectralField& u, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = s == 0.0 ? 1.0 : std::pow(1.0 + norm_sq(u.geometry().mode_at(i)), s);
    acc += w * std::norm(u.at(i));
  }
  return std::sqrt(acc);
}

Complex inner(const SpectralField& u, const SpectralField& v) {
  require_same(u.geometry(), v.geometry(), "inner");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u.at(i) * std::conj(v.at(i));
  return acc;
}

double grid_l2_norm_sq(const GridField& g) {
  double acc = 0.0;
  for (const auto& v : g.values()) acc += std::norm(v);
  return acc * g.cell_volume();
}

// ---------------------------------------------------------------------------
// Spectral sums

namespace {

// Direct summation limit for the one-dimensional series; the remainder is
// handled by Euler-Maclaurin with an asymptotic expansion of the integral.
constexpr long kDirectTerms = 20000;
// Rows beyond this |n_1| use the Poisson-summation closed form, whose
// neglected terms are O(exp(-2 pi kPoissonRows)).
constexpr int kPoissonRows = 40;

// sum_{n >= 1} (c + n^2)^{-p/2}, for p > 1 and 1 <= c << kDirectTerms^2.
double half_line_sum(double c, double p) {
  double direct = 0.0;
  for (long n = kDirectTerms; n >= 1; --n) direct += std::pow(c + double(n) * n, -0.5 * p);

  const double x = static_cast<double>(kDirectTerms);
  // integral_x^inf (c + t^2)^{-p/2} dt = sum_k binom(-p/2, k) c^k x^{1-p-2k} / (p + 2k - 1)
  double integral = 0.0;
  double binom = 1.0;
  double ck = 1.0;
  for (int k = 0; k < 30; ++k) {
    const double term = binom * ck * std::pow(x, 1.0 - p - 2.0 * k) / (p + 2.0 * k - 1.0);
    integral += term;
    if (std::abs(term) < 1e-300 || std::abs(term) < 1e-18 * std::abs(integral)) break;
    binom *= (-0.5 * p - k) / (k + 1.0);
    ck *= c;
  }
  const double f = std::pow(c + x * x, -0.5 * p);
  const double df = -p * x * std::pow(c + x * x, -0.5 * p - 1.0);
  return direct + integral - 0.5 * f - df / 12.0;
}

double lattice_sum_infinite(double alpha, int dim) {
  if (dim == 1) return 1.0 + 2.0 * half_line_sum(1.0, alpha);

  // d = 2: row sums T(c) = sum_{m in Z} (c + m^2)^{-alpha/2}, c = 1 + n_1^2.
  double total = 0.0;
  for (int n1 = -kPoissonRows; n1 <= kPoissonRows; ++n1) {
    const double c = 1.0 + double(n1) * n1;
    total += std::pow(c, -0.5 * alpha) + 2.0 * half_line_sum(c, alpha);
  }
  // For large c, T(c) = sqrt(pi) Gamma((alpha-1)/2) / Gamma(alpha/2) c^{(1-alpha)/2}.
  const double k = std::sqrt(kPi) * std::tgamma(0.5 * (alpha - 1.0)) / std::tgamma(0.5 * alpha);
  double head = 0.0;
  for (int n = 1; n <= kPoissonRows; ++n) head += std::pow(1.0 + double(n) * n, -0.5 * (alpha - 1.0));
  total += 2.0 * k * (half_line_sum(1.0, alpha - 1.0) - head);
  return total;
}

}  // namespace

double sigma(double alpha, double cutoff, int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("sigma: dim must be 1 or 2");
  if (std::isinf(cutoff)) {
    if (!(alpha > dim))
      throw std::domain_error("sigma: series diverges unless alpha > d");
    return lattice_sum_infinite(alpha, dim) / std::pow(kTwoPi, dim);
  }
  if (cutoff < 0) throw std::invalid_argument("sigma: cutoff must be >= 0");
  const auto r = static_cast<long>(std::floor(cutoff));
  const double c2 = cutoff * cutoff;
  double acc = 0.0;
  if (dim == 1) {
    for (long n = r; n >= 1; --n) acc += 2.0 * std::pow(1.0 + double(n) * n, -0.5 * alpha);
    acc += 1.0;
  } else {
    for (long n1 = -r; n1 <= r; ++n1)
      for (long n2 = -r; n2 <= r; ++n2) {
        const double q = double(n1) * n1 + double(n2) * n2;
        if (q <= c2) acc += std::pow(1.0 + q, -0.5 * alpha);
      }
  }
  return acc / std::pow(kTwoPi, dim);
}

std::int64_t weyl_count(double lambda, int dim) {
  if (lambda < 0) throw std::invalid_argument("weyl_count: lambda must be >= 0");
  const auto r = static_cast<std::int64_t>(std::floor(lambda));
  if (dim == 1) return 2 * r + 1;
  if (dim != 2) throw std::invalid_argument("weyl_count: dim must be 1 or 2");
  const double l2 = lambda * lambda;
  std::int64_t count = 0;
  for (std::int64_t n1 = -r; n1 <= r; ++n1) {
    const double rest = l2 - double(n1) * n1;
    auto m = static_cast<std::int64_t>(std::floor(std::sqrt(std::max(rest, 0.0))));
    while (double(m + 1) * (m + 1) <= rest) ++m;
    while (m > 0 && double(m) * m > rest) --m;
    count += 2 * m + 1;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Snapshots

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(b, 4);
}

void put_f64(std::ostream& out, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(b, 8);
}

std::uint64_t get_le(std::istream& in, int bytes) {
  unsigned char b[8] = {};
  if (!in.read(reinterpret_cast<char*>(b), bytes))
    throw std::runtime_error("read_snapshot: truncated input");
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

void write_snapshot(std::ostream& out, const SpectralField& u) {
  out.write("GNLS", 4);
  put_u32(out, kSnapshotVersion);
  put_u32(out, static_cast<std::uint32_t>(u.geometry().dim()));
  put_u32(out, static_cast<std::uint32_t>(u.geometry().n_max()));
  for (const auto& c : u.coeffs()) {
    put_f64(out, c.real());
    put_f64(out, c.imag());
  }
  if (!out) throw std::runtime_error("write_snapshot: stream error");
}

SpectralField read_snapshot(std::istream& in, double oversampling) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "GNLS")
    throw std::runtime_error("read_snapshot: bad magic");
  const auto version = static_cast<std::uint32_t>(get_le(in, 4));
  if (version != kSnapshotVersion)
    throw std::runtime_error("read_snapshot: unsupported version " + std::to_string(version));
  const auto dim = static_cast<int>(get_le(in, 4));
  const auto n_max = static_cast<int>(get_le(in, 4));
  SpectralField u(TorusGeometry::with_oversampling(dim, n_max, oversampling));
  for (auto& c : u.coeffs()) {
    const double re = std::bit_cast<double>(get_le(in, 8));
    const double im = std::bit_cast<double>(get_le(in, 8));
    c = {re, im};
  }
  return u;
}

}  // namespace gnls
