#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "calwav/group.hpp"
#include "calwav/spectral.hpp"
#include "json.hpp"

namespace calwav {

struct Signal {
  Grid grid;
  std::vector<cplx> values;

  static Signal sample(const Grid& g, const std::function<cplx(std::span<const double>)>& fn);
  static Signal zeros(const Grid& g);
  double l2_norm() const;
};

/// Continuous Fourier transform on a periodic grid: forward kernel
/// exp(-2 pi i xi.x), scaled by the cell volume so that Parseval holds with
/// the paired FrequencyGrid (spacing 1 / (n dx), zero frequency at n/2).
class Fft {
 public:
  explicit Fft(const Grid& spatial);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  const Grid& spatial() const { return spatial_; }
  const Grid& frequency() const { return freq_; }
  std::size_t size() const { return n_; }

  void forward(std::span<const cplx> x, std::span<cplx> xi);
  void inverse(std::span<const cplx> xi, std::span<cplx> x);

 private:
  Grid spatial_, freq_;
  std::size_t n_ = 0;
  std::vector<std::size_t> perm_;  // frequency index -> DFT index
  std::vector<cplx> phase_;        // exp(-2 pi i xi_k.x0)
  cplx* buf_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

/// Full-mask spectrum of a signal, and back onto `spatial`.
SpectralFunction fourier(const Signal& f);
Signal inverse_fourier(const SpectralFunction& fhat, const Grid& spatial);

/// Circular shift by whole grid steps: out(x) = f(x - shift * dx).
Signal translate(const Signal& f, std::span<const long> shift);

/// Values of psi_hat(h^T xi) on every point of a frequency grid. Uses the
/// vector kernels for d <= 2.
class DilatedSampler {
 public:
  DilatedSampler(const SpectralFunction& psi_hat, const Grid& freq);
  DilatedSampler(const DilatedSampler&) = delete;
  DilatedSampler& operator=(const DilatedSampler&) = delete;

  void sample(const Mat& h, double scale, std::span<double> re, std::span<double> im) const;

 private:
  SpectralFunction psi_;
  Grid freq_;
  std::vector<double> xs_, ys_;
  std::unique_ptr<InterpTable> table_;
};

struct WaveletCoefficients {
  Grid grid;  // spatial grid of the translation variable
  QuadratureRule h_nodes;
  std::vector<std::vector<cplx>> planes;  // V_psi f(., h_i)
  std::vector<double> group_measure_weights;  // w_i / delta(h_i)
};

/// plane_h = IFFT( f_hat(xi) conj( delta(h)^{1/2} psi_hat(h^T xi) ) ).
WaveletCoefficients analyze(const GroupModel& g, const Signal& f, const SpectralFunction& psi_hat,
                            const QuadratureRule& q);

/// sqrt( sum_i (w_i / delta_i) sum_b |plane_i(b)|^2 dx^d ).
double coefficient_norm(const WaveletCoefficients& w);

/// f_rec_hat = sum_i (w_i / delta_i) FFT(plane_i) delta_i^{1/2} psi_hat(h_i^T xi).
Signal synthesize(const GroupModel& g, const WaveletCoefficients& w, const SpectralFunction& psi_hat,
                  const QuadratureRule& q);

struct RoundtripResult {
  Signal reconstruction;
  double signal_norm = 0.0;
  double coefficient_norm = 0.0;
  double rel_err = 0.0;  // ||f_rec - f|| / ||f||
  double isometry_defect = 0.0;  // |coefficient_norm / ||f|| - 1|
  double edge_max = 0.0;  // max |f| over the outermost grid layer
  std::size_t nodes = 0;
  nlohmann::json to_json() const;
};

/// analyze + coefficient_norm + synthesize one node at a time, without
/// storing the planes. `keep` (optional) receives selected planes.
RoundtripResult roundtrip(const GroupModel& g, const Signal& f, const SpectralFunction& psi_hat, const QuadratureRule& q,
                          const std::function<void(std::size_t, std::span<const cplx>)>& keep = {});

/// One raster per selected node, named plane_<index>.cwr.
void export_planes(const std::filesystem::path& dir, const WaveletCoefficients& w, std::span<const std::size_t> nodes,
                   const nlohmann::json& config);

}  // namespace calwav
