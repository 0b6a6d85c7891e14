#pragma once
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "constants.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "zernike.hpp"
#include "zoom_dft.hpp"

namespace ponderolens {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// `standard` is the orthogonal Richards-Wolf rotation. `printed` swaps the
/// azimuthal cos^2/sin^2 of the diagonal for polar ones, kept for comparison.
enum class MatrixForm { standard, printed };

inline Mat3 polarization_matrix(double theta, double phi, MatrixForm form = MatrixForm::standard) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  const double c2 = form == MatrixForm::standard ? cp * cp : ct * ct;
  const double s2 = form == MatrixForm::standard ? sp * sp : st * st;
  return {{{1.0 + (ct - 1.0) * c2, (ct - 1.0) * cp * sp, -st * cp},
           {(ct - 1.0) * cp * sp, 1.0 + (ct - 1.0) * s2, -st * sp},
           {st * cp, st * sp, ct}}};
}

struct FocusConfig {
  double lambda_o = 2060e-9;
  double NA = 0.14;
  double f_o = 0.05;
  double out_x = 2.5e-6, out_y = 2.5e-6;  ///< half-extents
  std::vector<double> out_z;
  std::size_t nx_out = 201, ny_out = 201;
  MatrixForm matrix = MatrixForm::standard;

  void validate() const {
    if (!(NA > 0 && NA < 1)) throw ConfigError("focus.NA must lie in (0, 1)");
    if (!(lambda_o > 0)) throw ConfigError("focus: lambda must be > 0");
    if (!(f_o > 0)) throw ConfigError("focus.f_m must be > 0");
    if (!(out_x > 0 && out_y > 0)) throw ConfigError("focus: output half-extents must be > 0");
    if (nx_out < 1 || ny_out < 1) throw ConfigError("focus: output sampling must be >= 1");
    if (out_z.empty()) throw ConfigError("focus: z plane list is empty");
    for (std::size_t i = 1; i < out_z.size(); ++i)
      if (!(out_z[i] > out_z[i - 1])) throw ConfigError("focus: z planes must increase strictly");
  }
  double k() const { return 2.0 * constants::pi / lambda_o; }
  /// Pupil radius where the focusing angle reaches asin(NA).
  double pupil_radius() const { return f_o * std::tan(std::asin(NA)); }
  /// Hard stop radius mapped by sin(theta) = r/f.
  double aperture_radius() const { return f_o * NA; }
  Axis x_axis() const { return Axis::symmetric(nx_out, out_x); }
  Axis y_axis() const { return Axis::symmetric(ny_out, out_y); }
};

struct VectorField3D {
  Axis x, y;
  std::vector<double> z;
  std::vector<cplx> gx, gy, gz;  ///< index (iz*ny + iy)*nx + ix
};

struct ScalarFieldStack3D {
  Axis x, y;
  std::vector<double> z;
  double gamma0 = 1.0;
  std::vector<double> S;  ///< (V/m)^2, index (iz*ny + iy)*nx + ix

  std::size_t nx() const { return x.n; }
  std::size_t ny() const { return y.n; }
  std::size_t nz() const { return z.size(); }
  double at(std::size_t iz, std::size_t iy, std::size_t ix) const {
    return S[(iz * y.n + iy) * x.n + ix];
  }
};

/// Pupil pixels inside the stop with the x-column of M and the axial phase rate.
class PupilGeometry {
 public:
  PupilGeometry(const Axis& axis, const FocusConfig& cfg) : axis_(axis), cfg_(cfg) {
    cfg.validate();
    const double stop = cfg.aperture_radius();
    for (std::size_t iy = 0; iy < axis.n; ++iy)
      for (std::size_t ix = 0; ix < axis.n; ++ix) {
        const double x = axis.at(ix), y = axis.at(iy);
        const double r = std::hypot(x, y);
        if (r > stop) continue;
        const double st = r / cfg.f_o;
        if (st >= 1.0) throw ConfigError("focus: pupil mapping exceeds sin(theta) = 1");
        const double theta = std::asin(st);
        const double phi = (r == 0.0) ? 0.0 : std::atan2(y, x);
        const Mat3 M = polarization_matrix(theta, phi, cfg.matrix);
        idx_.push_back(iy * axis.n + ix);
        row_.push_back(iy);
        col_.push_back(ix);
        m_.push_back({M[0][0], M[1][0], M[2][0]});
        rate_.push_back(cfg.k() * (1.0 - std::cos(theta)));
      }
  }
  const Axis& axis() const { return axis_; }
  const FocusConfig& cfg() const { return cfg_; }
  std::size_t size() const { return idx_.size(); }
  double dA() const { return axis_.step() * axis_.step(); }
  /// Debye prefactor -i dA / (lambda f).
  cplx prefactor() const { return cplx(0.0, -dA() / (cfg_.lambda_o * cfg_.f_o)); }
  /// Spatial-frequency scale k/f expressed as 1/(lambda f) in cycles.
  double scale() const { return 1.0 / (cfg_.lambda_o * cfg_.f_o); }

  std::vector<std::size_t> idx_, row_, col_;
  std::vector<std::array<double, 3>> m_;
  std::vector<double> rate_;

 private:
  Axis axis_;
  FocusConfig cfg_;
};

namespace detail {
/// Applies exp(i*q*z) to compressed pupil samples for a list of planes, using a
/// rotation recurrence on uniform spacing and re-anchoring periodically.
class AxialPhase {
 public:
  AxialPhase(const std::vector<double>& rate, const std::vector<double>& z)
      : rate_(rate), z_(z), cur_(rate.size()), step_(rate.size()) {
    uniform_ = z.size() > 2;
    if (uniform_) {
      const double dz = z[1] - z[0];
      for (std::size_t i = 2; i < z.size(); ++i)
        if (std::abs((z[i] - z[i - 1]) - dz) > 1e-9 * std::abs(dz)) uniform_ = false;
      if (uniform_)
        for (std::size_t p = 0; p < rate.size(); ++p) step_[p] = std::polar(1.0, rate[p] * dz);
    }
  }
  const std::vector<cplx>& plane(std::size_t j) {
    if (!uniform_ || j % 32 == 0 || j != last_ + 1) {
      for (std::size_t p = 0; p < rate_.size(); ++p) cur_[p] = std::polar(1.0, rate_[p] * z_[j]);
    } else {
      for (std::size_t p = 0; p < rate_.size(); ++p) cur_[p] *= step_[p];
    }
    last_ = j;
    return cur_;
  }

 private:
  const std::vector<double>& rate_;
  const std::vector<double>& z_;
  std::vector<cplx> cur_, step_;
  bool uniform_ = false;
  std::size_t last_ = std::size_t(-1);
};
}  // namespace detail

/// Full vectorial focal field on the configured (x, y, z) lattice.
inline VectorField3D debye_focal_field(const ComplexField2D& Ei, const FocusConfig& cfg) {
  cfg.validate();
  if (Ei.nx() != Ei.ny() || !(Ei.x == Ei.y)) throw ConfigError("debye: pupil grid must be square");
  PupilGeometry geo(Ei.x, cfg);
  const Axis ox = cfg.x_axis(), oy = cfg.y_axis();
  ZoomTransform2D zt(Ei.x, Ei.y, ox, oy, geo.scale(), +1);
  VectorField3D out{ox, oy, cfg.out_z, {}, {}, {}};
  const std::size_t plane = ox.n * oy.n, nz = cfg.out_z.size();
  out.gx.resize(plane * nz);
  out.gy.resize(plane * nz);
  out.gz.resize(plane * nz);
  const cplx pref = geo.prefactor();
  for (std::size_t j = 0; j < nz; ++j) {
    std::array<ComplexField2D, 3> P{ComplexField2D(Ei.x, Ei.y), ComplexField2D(Ei.x, Ei.y),
                                    ComplexField2D(Ei.x, Ei.y)};
    for (std::size_t p = 0; p < geo.size(); ++p) {
      const cplx v = Ei.data[geo.idx_[p]] * std::polar(1.0, geo.rate_[p] * cfg.out_z[j]) * pref;
      for (int c = 0; c < 3; ++c) P[c].data[geo.idx_[p]] = v * geo.m_[p][c];
    }
    std::vector<cplx>* dst[3] = {&out.gx, &out.gy, &out.gz};
    for (int c = 0; c < 3; ++c) {
      ComplexField2D g = zt(P[c]);
      std::copy(g.data.begin(), g.data.end(), dst[c]->begin() + j * plane);
    }
  }
  return out;
}

inline ScalarFieldStack3D effective_intensity(const VectorField3D& g, double gamma0) {
  ScalarFieldStack3D s{g.x, g.y, g.z, gamma0, std::vector<double>(g.gx.size())};
  const double ig2 = 1.0 / (gamma0 * gamma0);
  for (std::size_t i = 0; i < g.gx.size(); ++i)
    s.S[i] = std::norm(g.gx[i]) + std::norm(g.gy[i]) + std::norm(g.gz[i]) * ig2;
  return s;
}

/// Effective-intensity stack built plane by plane without keeping the vector field.
inline ScalarFieldStack3D intensity_stack(const ComplexField2D& Ei, const FocusConfig& cfg,
                                          double gamma0) {
  cfg.validate();
  PupilGeometry geo(Ei.x, cfg);
  const Axis ox = cfg.x_axis(), oy = cfg.y_axis();
  ZoomTransform2D zt(Ei.x, Ei.y, ox, oy, geo.scale(), +1);
  const std::size_t plane = ox.n * oy.n, nz = cfg.out_z.size();
  ScalarFieldStack3D s{ox, oy, cfg.out_z, gamma0, std::vector<double>(plane * nz)};
  const cplx pref = geo.prefactor();
  const double ig2 = 1.0 / (gamma0 * gamma0);
  parallel_for(nz, [&](std::size_t j, int) {
    std::array<ComplexField2D, 3> P{ComplexField2D(Ei.x, Ei.y), ComplexField2D(Ei.x, Ei.y),
                                    ComplexField2D(Ei.x, Ei.y)};
    for (std::size_t p = 0; p < geo.size(); ++p) {
      const cplx v = Ei.data[geo.idx_[p]] * std::polar(1.0, geo.rate_[p] * cfg.out_z[j]) * pref;
      for (int c = 0; c < 3; ++c) P[c].data[geo.idx_[p]] = v * geo.m_[p][c];
    }
    double* dst = &s.S[j * plane];
    for (int c = 0; c < 3; ++c) {
      ComplexField2D g = zt(P[c]);
      const double w = c == 2 ? ig2 : 1.0;
      for (std::size_t i = 0; i < plane; ++i) dst[i] += w * std::norm(g.data[i]);
    }
  });
  return s;
}

/// Fields on the two transverse axis lines: x = 0 (varying y) and y = 0 (varying x).
struct AxisLineFields {
  Axis t;
  std::vector<double> z;
  /// [component][iz*n + i]
  std::array<std::vector<cplx>, 3> along_y, along_x;

  double S_along_y(std::size_t iz, std::size_t i, double gamma0) const {
    const std::size_t k = iz * t.n + i;
    return std::norm(along_y[0][k]) + std::norm(along_y[1][k]) +
           std::norm(along_y[2][k]) / (gamma0 * gamma0);
  }
  double S_along_x(std::size_t iz, std::size_t i, double gamma0) const {
    const std::size_t k = iz * t.n + i;
    return std::norm(along_x[0][k]) + std::norm(along_x[1][k]) +
           std::norm(along_x[2][k]) / (gamma0 * gamma0);
  }
};

/// Line fields for several transverse axes at once. At x = 0 the x-exponential
/// is 1, so each plane reduces to a row sum followed by a short 1-D transform.
inline std::vector<AxisLineFields> axis_line_fields(const PupilGeometry& geo,
                                                    const ComplexField2D& Ei,
                                                    const std::vector<double>& z,
                                                    const std::vector<Axis>& lines,
                                                    bool want_along_x = true) {
  const std::size_t Np = geo.axis().n;
  if (Ei.nx() != Np || Ei.ny() != Np) throw MismatchError("axis_line_fields: pupil mismatch");
  const cplx pref = geo.prefactor();
  std::vector<std::vector<cplx>> ker(lines.size());
  for (std::size_t L = 0; L < lines.size(); ++L) {
    ker[L].resize(lines[L].n * Np);
    for (std::size_t i = 0; i < lines[L].n; ++i)
      for (std::size_t m = 0; m < Np; ++m)
        ker[L][i * Np + m] =
            std::polar(1.0, 2.0 * constants::pi * geo.scale() * lines[L].at(i) * geo.axis().at(m));
  }
  std::vector<AxisLineFields> out(lines.size());
  for (std::size_t L = 0; L < lines.size(); ++L) {
    out[L].t = lines[L];
    out[L].z = z;
    for (int c = 0; c < 3; ++c) {
      out[L].along_y[c].assign(z.size() * lines[L].n, cplx(0));
      if (want_along_x) out[L].along_x[c].assign(z.size() * lines[L].n, cplx(0));
    }
  }
  std::vector<cplx> a(geo.size());
  for (std::size_t p = 0; p < geo.size(); ++p) a[p] = Ei.data[geo.idx_[p]] * pref;
  detail::AxialPhase ph(geo.rate_, z);
  std::vector<cplx> rs(3 * Np), cs(3 * Np);
  for (std::size_t j = 0; j < z.size(); ++j) {
    const auto& ez = ph.plane(j);
    std::fill(rs.begin(), rs.end(), cplx(0));
    std::fill(cs.begin(), cs.end(), cplx(0));
    for (std::size_t p = 0; p < geo.size(); ++p) {
      const cplx v = a[p] * ez[p];
      const auto& m = geo.m_[p];
      const std::size_t r = geo.row_[p], q = geo.col_[p];
      for (int c = 0; c < 3; ++c) {
        const cplx w = v * m[c];
        rs[c * Np + r] += w;
        if (want_along_x) cs[c * Np + q] += w;
      }
    }
    for (std::size_t L = 0; L < lines.size(); ++L) {
      const std::size_t n = lines[L].n;
      for (std::size_t i = 0; i < n; ++i) {
        const cplx* kr = &ker[L][i * Np];
        for (int c = 0; c < 3; ++c) {
          cplx sy = 0, sx = 0;
          for (std::size_t m = 0; m < Np; ++m) {
            sy += kr[m] * rs[c * Np + m];
            if (want_along_x) sx += kr[m] * cs[c * Np + m];
          }
          out[L].along_y[c][j * n + i] = sy;
          if (want_along_x) out[L].along_x[c][j * n + i] = sx;
        }
      }
    }
  }
  return out;
}

/// Largest |g| found on both axis lines of a survey.
inline double line_peak_field(const AxisLineFields& f) {
  double best = 0.0;
  for (std::size_t iz = 0; iz < f.z.size(); ++iz)
    for (std::size_t i = 0; i < f.t.n; ++i) {
      best = std::max(best, f.S_along_y(iz, i, 1.0));
      if (!f.along_x[0].empty()) best = std::max(best, f.S_along_x(iz, i, 1.0));
    }
  return std::sqrt(best);
}

/// Single-pulse energy for a field-envelope intensity profile exp(-t^2/sigma_t^2).
inline double pulse_energy(const ComplexField2D& Ei, double sigma_t) {
  double p = 0.0;
  for (const auto& v : Ei.data) p += std::norm(v);
  const double dA = Ei.x.step() * Ei.y.step();
  return 0.5 * constants::c * constants::eps0 * p * dA * std::sqrt(constants::pi) * sigma_t;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n > 1 ? a + (b - a) * double(i) / double(n - 1) : a;
  return v;
}

}  // namespace ponderolens
