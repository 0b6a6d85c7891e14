#pragma once
#include <cmath>
#include <vector>

#include "constants.hpp"
#include "fft.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace ponderolens {

namespace detail {
/// exp(i*pi*t) with t reduced modulo 2 in extended precision.
inline cplx unit_phase_pi(long double t) {
  long double r = std::fmod(t, 2.0L);
  return std::polar(1.0, double(constants::pi * (long double)1.0 * r));
}
}  // namespace detail

/// Chirp-z transform X[k] = sum_m x[m] exp(-2 pi i (a + k d) m), m < M, k < K,
/// evaluated by Bluestein's convolution. Reusable for many inputs of length M.
class ChirpZ {
 public:
  ChirpZ(std::size_t M, std::size_t K, double a, double d) : M_(M), K_(K) {
    if (M == 0 || K == 0) throw ConfigError("ChirpZ: empty transform");
    if (!std::isfinite(a) || !std::isfinite(d)) throw ConfigError("ChirpZ: non-finite lattice");
    L_ = fft::next_pow2(int(M + K - 1));
    pre_.resize(M);
    post_.resize(K, cplx(1.0));
    const long double dl = d, al = a;
    for (std::size_t m = 0; m < M; ++m) {
      const long double mm = (long double)m;
      pre_[m] = detail::unit_phase_pi(-2.0L * std::fmod(al * mm, 1.0L) - dl * mm * mm);
    }
    for (std::size_t k = 0; k < K; ++k) {
      const long double kk = (long double)k;
      post_[k] = detail::unit_phase_pi(-dl * kk * kk);
    }
    kernel_.assign(L_, cplx(0.0));
    for (std::size_t n = 0; n < K; ++n) kernel_[n] = detail::unit_phase_pi(dl * (long double)n * n);
    for (std::size_t n = 1; n < M; ++n)
      kernel_[L_ - n] = detail::unit_phase_pi(dl * (long double)n * n);
    fft::transform(kernel_.data(), L_, FFTW_FORWARD);
    const double inv = 1.0 / double(L_);
    for (auto& v : kernel_) v *= inv;
  }

  std::size_t in_size() const { return M_; }
  std::size_t out_size() const { return K_; }

  /// Extra per-output factor folded into the final chirp.
  void scale_output(const std::vector<cplx>& f) {
    for (std::size_t k = 0; k < K_; ++k) post_[k] *= f[k];
  }

  /// x is read with stride sx, result written to y with stride sy. buf is scratch.
  void apply(const cplx* x, std::size_t sx, cplx* y, std::size_t sy, std::vector<cplx>& buf) const {
    buf.assign(L_, cplx(0.0));
    for (std::size_t m = 0; m < M_; ++m) buf[m] = x[m * sx] * pre_[m];
    fft::transform(buf.data(), L_, FFTW_FORWARD);
    for (int i = 0; i < L_; ++i) buf[i] *= kernel_[i];
    fft::transform(buf.data(), L_, FFTW_BACKWARD);
    for (std::size_t k = 0; k < K_; ++k) y[k * sy] = buf[k] * post_[k];
  }

  std::vector<cplx> operator()(const std::vector<cplx>& x) const {
    if (x.size() != M_) throw MismatchError("ChirpZ: input length mismatch");
    std::vector<cplx> y(K_), buf;
    apply(x.data(), 1, y.data(), 1, buf);
    return y;
  }

 private:
  std::size_t M_, K_;
  int L_;
  std::vector<cplx> pre_, post_, kernel_;
};

/// Normalised-frequency 2-D zoomed DFT:
/// X[ky][kx] = sum_{my,mx} f[my][mx] exp(-2 pi i ((fx + kx dfx) mx + (fy + ky dfy) my)).
/// Frequencies are in cycles per sample; the input index starts at 0.
inline std::vector<cplx> bluestein_dft2(const std::vector<cplx>& f, std::size_t nx_in,
                                        std::size_t ny_in, double fx, double fy, double dfx,
                                        double dfy, std::size_t nx_out, std::size_t ny_out) {
  if (nx_out < 2 || ny_out < 2) throw ConfigError("bluestein_dft2: output must be at least 2x2");
  if (!(dfx > 0) || !(dfy > 0)) throw ConfigError("bluestein_dft2: spans must be > 0");
  if (f.size() != nx_in * ny_in) throw MismatchError("bluestein_dft2: input size mismatch");
  ChirpZ rows(nx_in, nx_out, fx, dfx), cols(ny_in, ny_out, fy, dfy);
  std::vector<cplx> tmp(ny_in * nx_out), out(ny_out * nx_out);
  std::vector<std::vector<cplx>> bufs(thread_count().load() + 1);
  parallel_for(ny_in, [&](std::size_t iy, int w) {
    rows.apply(&f[iy * nx_in], 1, &tmp[iy * nx_out], 1, bufs[w]);
  });
  parallel_for(nx_out, [&](std::size_t kx, int w) {
    cols.apply(&tmp[kx], nx_out, &out[kx], nx_out, bufs[w]);
  });
  return out;
}

/// Physical-coordinate 1-D zoomed Fourier sum
/// F(u_k) = sum_m f(x_m) exp(sign * 2 pi i * scale * x_m * u_k).
class ZoomAxis {
 public:
  ZoomAxis(const Axis& in, const Axis& out, double scale, int sign)
      : cz_(in.n, out.n, -sign * scale * in.step() * out.min,
            out.n > 1 ? -sign * scale * in.step() * out.step() : 0.0) {
    std::vector<cplx> f(out.n);
    for (std::size_t k = 0; k < out.n; ++k)
      f[k] = std::polar(1.0, sign * 2.0 * constants::pi * scale * in.min * out.at(k));
    cz_.scale_output(f);
  }
  const ChirpZ& cz() const { return cz_; }

 private:
  ChirpZ cz_;
};

/// Separable physical 2-D transform of a Grid2D onto a new grid.
class ZoomTransform2D {
 public:
  ZoomTransform2D(const Axis& in_x, const Axis& in_y, const Axis& out_x, const Axis& out_y,
                  double scale, int sign)
      : ox_(out_x), oy_(out_y), zx_(in_x, out_x, scale, sign), zy_(in_y, out_y, scale, sign) {}

  ComplexField2D operator()(const ComplexField2D& f) const {
    const std::size_t nxi = f.nx(), nyi = f.ny(), nxo = ox_.n;
    if (nxi != zx_.cz().in_size() || nyi != zy_.cz().in_size())
      throw MismatchError("ZoomTransform2D: input grid mismatch");
    std::vector<cplx> tmp(nyi * nxo);
    ComplexField2D out(ox_, oy_);
    std::vector<std::vector<cplx>> bufs(thread_count().load() + 1);
    parallel_for(nyi, [&](std::size_t iy, int w) {
      zx_.cz().apply(&f.data[iy * nxi], 1, &tmp[iy * nxo], 1, bufs[w]);
    });
    parallel_for(nxo, [&](std::size_t kx, int w) {
      zy_.cz().apply(&tmp[kx], nxo, &out.data[kx], nxo, bufs[w]);
    });
    return out;
  }

 private:
  Axis ox_, oy_;
  ZoomAxis zx_, zy_;
};

}  // namespace ponderolens
