#pragma once

#include <jdist/summation.hpp>

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace jdist {

using cplx = std::complex<double>;

/// e^{2 pi i num/den}, with the argument reduced to the first octant in
/// exact integer arithmetic before calling sin/cos.
inline cplx unit_root(std::int64_t num, std::uint64_t den) {
  const auto d = static_cast<std::int64_t>(den);
  std::int64_t r = num % d;
  if (r < 0) r += d;
  // 4r = quadrant*den + rem, 0 <= rem < den
  const auto r4 = static_cast<unsigned __int128>(r) * 4u;
  const auto quadrant = static_cast<unsigned>(r4 / den);
  const auto rem = static_cast<std::uint64_t>(r4 % den);
  double c = 0;
  double s = 0;
  if (2 * rem <= den) {
    const double a = std::numbers::pi / 2 * static_cast<double>(rem) / static_cast<double>(den);
    c = std::cos(a);
    s = std::sin(a);
  } else {
    const double a = std::numbers::pi / 2 * static_cast<double>(den - rem) / static_cast<double>(den);
    c = std::sin(a);
    s = std::cos(a);
  }
  switch (quadrant) {
    case 0: return {c, s};
    case 1: return {-s, c};
    case 2: return {-c, -s};
    default: return {s, -c};
  }
}

/// e^{2 pi i x} for a real number of turns x.
inline cplx cis_turns(double x) {
  x -= std::floor(x);
  return {std::cos(2 * std::numbers::pi * x), std::sin(2 * std::numbers::pi * x)};
}

/// Iterative radix-2 FFT of a fixed power-of-two length. Twiddles are taken
/// from `unit_root`, never from repeated multiplication.
class Pow2Fft {
 public:
  explicit Pow2Fft(std::size_t n) : n_(n), twiddle_(n / 2), rev_(n) {
    for (std::size_t i = 0; i < n / 2; ++i) twiddle_[i] = unit_root(static_cast<std::int64_t>(i), n);
    const int bits = std::countr_zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      rev_[i] = r;
    }
  }

  [[nodiscard]] std::size_t size() const { return n_; }

  /// In place: x_k <- sum_t x_t e^{sign 2 pi i k t / n}.
  void transform(std::span<cplx> x, int sign) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < rev_[i]) std::swap(x[i], x[rev_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          cplx w = twiddle_[j * stride];
          if (sign < 0) w = std::conj(w);
          const cplx u = x[start + j];
          const cplx v = x[start + j + half] * w;
          x[start + j] = u + v;
          x[start + j + half] = u - v;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<cplx> twiddle_;
  std::vector<std::size_t> rev_;
};

/// Discrete Fourier transform of arbitrary length N:
///   X_k = sum_{t<N} x_t e^{sign 2 pi i k t / N}   (no normalization).
/// Lengths below `kNaiveCutoff` are summed directly (pairwise, per output);
/// longer ones use the chirp (Bluestein) identity
///   kt = (k^2 + t^2 - (k-t)^2) / 2
/// which turns the transform into one linear convolution, evaluated by a
/// zero-padded power-of-two FFT. The chirp spectrum is computed once per
/// plan and reused.
class DftPlan {
 public:
  static constexpr std::size_t kNaiveCutoff = 512;

  explicit DftPlan(std::size_t n) : n_(n), roots_(n) {
    for (std::size_t i = 0; i < n; ++i) roots_[i] = unit_root(static_cast<std::int64_t>(i), n);
    if (n < kNaiveCutoff) return;
    const std::size_t padded = std::bit_ceil(2 * n - 1);
    fft_ = std::make_unique<Pow2Fft>(padded);
    chirp_.resize(n);
    const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
    for (std::size_t t = 0; t < n; ++t) {
      // e^{pi i t^2 / N} = e^{2 pi i (t^2 mod 2N) / (2N)}
      const auto t2 = static_cast<std::uint64_t>((static_cast<unsigned __int128>(t) * t) % two_n);
      chirp_[t] = unit_root(static_cast<std::int64_t>(t2), two_n);
    }
    // Kernel for sign=+1 is conj(chirp) at offsets -(N-1)..(N-1); sign=-1 uses chirp.
    for (int s = 0; s < 2; ++s) {
      auto& kernel = kernel_spectrum_[s];
      kernel.assign(padded, cplx{});
      for (std::size_t t = 0; t < n; ++t) {
        const cplx c = s == 0 ? std::conj(chirp_[t]) : chirp_[t];
        kernel[t] = c;
        if (t != 0) kernel[padded - t] = c;
      }
      fft_->transform(kernel, -1);
    }
  }

  DftPlan(const DftPlan&) = delete;
  DftPlan& operator=(const DftPlan&) = delete;
  DftPlan(DftPlan&&) noexcept = default;
  DftPlan& operator=(DftPlan&&) noexcept = default;

  [[nodiscard]] std::size_t size() const { return n_; }

  [[nodiscard]] std::vector<cplx> transform(std::span<const cplx> x, int sign) const {
    if (n_ < kNaiveCutoff) return naive(x, sign);
    return bluestein(x, sign);
  }

 private:
  [[nodiscard]] std::vector<cplx> naive(std::span<const cplx> x, int sign) const {
    std::vector<cplx> out(n_);
    std::vector<cplx> terms(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t idx = 0;
      for (std::size_t t = 0; t < n_; ++t) {
        const cplx w = sign > 0 ? roots_[idx] : std::conj(roots_[idx]);
        terms[t] = x[t] * w;
        idx += k;
        if (idx >= n_) idx -= n_;
      }
      out[k] = pairwise_sum<cplx>(terms);
    }
    return out;
  }

  [[nodiscard]] std::vector<cplx> bluestein(std::span<const cplx> x, int sign) const {
    const std::size_t padded = fft_->size();
    const int s = sign > 0 ? 0 : 1;
    // c_t = e^{sign pi i t^2/N};  X_k = c_k * sum_t (x_t c_t) conj(c_{k-t})
    std::vector<cplx> work(padded, cplx{});
    for (std::size_t t = 0; t < n_; ++t) {
      const cplx c = s == 0 ? chirp_[t] : std::conj(chirp_[t]);
      work[t] = x[t] * c;
    }
    fft_->transform(work, -1);
    const auto& kernel = kernel_spectrum_[s];
    for (std::size_t i = 0; i < padded; ++i) work[i] *= kernel[i];
    fft_->transform(work, +1);
    const double scale = 1.0 / static_cast<double>(padded);
    std::vector<cplx> out(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      const cplx c = s == 0 ? chirp_[k] : std::conj(chirp_[k]);
      out[k] = work[k] * scale * c;
    }
    return out;
  }

  std::size_t n_;
  std::vector<cplx> roots_;
  std::unique_ptr<Pow2Fft> fft_;
  std::vector<cplx> chirp_;
  std::vector<cplx> kernel_spectrum_[2];
};

inline std::vector<cplx> dft(std::span<const cplx> x, int sign) {
  return DftPlan(x.size()).transform(x, sign);
}

/// (a (*) b)_k = sum_{i+j = k mod N} a_i b_j
inline std::vector<cplx> cyclic_convolution(const DftPlan& plan, std::span<const cplx> a,
                                            std::span<const cplx> b) {
  auto fa = plan.transform(a, -1);
  const auto fb = plan.transform(b, -1);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  auto out = plan.transform(fa, +1);
  const double scale = 1.0 / static_cast<double>(plan.size());
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace jdist
