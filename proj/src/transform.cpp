#include "calwav/transform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "calwav/raster_io.hpp"
#include "calwav/simd/kernels.hpp"
#include "detail.hpp"

namespace calwav {

using nlohmann::json;

Signal Signal::sample(const Grid& g, const std::function<cplx(std::span<const double>)>& fn) {
  Signal s = zeros(g);
  for (std::size_t k = 0; k < g.size(); ++k) s.values[k] = fn(g.point(k));
  return s;
}

Signal Signal::zeros(const Grid& g) {
  Signal s;
  s.grid = g;
  s.values.assign(g.size(), cplx{});
  return s;
}

double Signal::l2_norm() const {
  double s = 0.0;
  for (const cplx& v : values) s += std::norm(v);
  return std::sqrt(s * grid.cell_volume());
}

// ---------------------------------------------------------------- FFT

Fft::Fft(const Grid& spatial) : spatial_(spatial), freq_(Grid::fft_dual(spatial)), n_(spatial.size()) {
  const int d = spatial.d();
  std::vector<int> dims(spatial.shape.begin(), spatial.shape.end());
  perm_.resize(n_);
  phase_.resize(n_);
  std::vector<long> idx(d, 0);
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t flat = 0;
    double arg = 0.0;
    for (int a = 0; a < d; ++a) {
      const long n = spatial.shape[a];
      const long m = ((idx[a] - n / 2) % n + n) % n;
      flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(m);
      arg += (freq_.origin[a] + static_cast<double>(idx[a]) * freq_.spacing[a]) * spatial.origin[a];
    }
    perm_[k] = flat;
    phase_[k] = std::polar(1.0, -2.0 * std::numbers::pi * arg);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < spatial.shape[a]) break;
      idx[a] = 0;
    }
  }
  buf_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * n_));
  auto* b = reinterpret_cast<fftw_complex*>(buf_);
  plan_fwd_ = fftw_plan_dft(d, dims.data(), b, b, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft(d, dims.data(), b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) throw Error("FFTW planning failed");
}

Fft::~Fft() {
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(buf_);
}

void Fft::forward(std::span<const cplx> x, std::span<cplx> xi) {
  if (x.size() != n_ || xi.size() != n_) throw Error("grid mismatch");
  std::copy(x.begin(), x.end(), buf_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  const double vol = spatial_.cell_volume();
  for (std::size_t k = 0; k < n_; ++k) xi[k] = vol * phase_[k] * buf_[perm_[k]];
}

void Fft::inverse(std::span<const cplx> xi, std::span<cplx> x) {
  if (x.size() != n_ || xi.size() != n_) throw Error("grid mismatch");
  for (std::size_t k = 0; k < n_; ++k) buf_[perm_[k]] = xi[k] * std::conj(phase_[k]);
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  const double vol = freq_.cell_volume();
  for (std::size_t j = 0; j < n_; ++j) x[j] = vol * buf_[j];
}

SpectralFunction fourier(const Signal& f) {
  Fft fft(f.grid);
  SpectralFunction out(fft.frequency(), mask_catalog("full", json::object(), f.grid.d()));
  fft.forward(f.values, out.values);
  return out;
}

Signal inverse_fourier(const SpectralFunction& fhat, const Grid& spatial) {
  Fft fft(spatial);
  if (!(fft.frequency() == fhat.grid)) throw Error("grid mismatch");
  Signal s = Signal::zeros(spatial);
  fft.inverse(fhat.values, s.values);
  return s;
}

Signal translate(const Signal& f, std::span<const long> shift) {
  const int d = f.grid.d();
  if (static_cast<int>(shift.size()) != d) throw Error("shift dimension mismatch");
  Signal out = Signal::zeros(f.grid);
  for (std::size_t k = 0; k < f.grid.size(); ++k) {
    auto idx = f.grid.unflatten(k);
    for (int a = 0; a < d; ++a) {
      const long n = f.grid.shape[a];
      idx[a] = ((idx[a] + shift[a]) % n + n) % n;
    }
    out.values[f.grid.flatten(idx)] = f.values[k];
  }
  return out;
}

// ---------------------------------------------------------------- sampler

DilatedSampler::DilatedSampler(const SpectralFunction& psi_hat, const Grid& freq) : psi_(psi_hat), freq_(freq) {
  if (psi_hat.grid.d() != freq.d()) throw Error("grid mismatch");
  const std::size_t n = freq.size();
  if (freq.d() <= 2) {
    xs_.resize(n);
    ys_.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec p = freq.point(k);
      xs_[k] = p[0];
      if (freq.d() == 2) ys_[k] = p[1];
    }
    table_ = std::make_unique<InterpTable>(psi_);
  }
}

void DilatedSampler::sample(const Mat& h, double scale, std::span<double> re, std::span<double> im) const {
  const std::size_t n = freq_.size();
  if (table_) {
    const auto m = detail::dual4(h);
    simd::kernels().dilate_eval(table_->view(), m.data(), xs_.data(), ys_.data(), n, scale, re.data(), im.data());
    return;
  }
  const Mat ht = h.transpose();
  for (std::size_t k = 0; k < n; ++k) {
    const cplx v = scale * psi_.evaluate(ht.apply(freq_.point(k)));
    re[k] = v.real();
    im[k] = v.imag();
  }
}

// ---------------------------------------------------------------- transform

namespace {

void check_inputs(const GroupModel& g, const Grid& spatial, const SpectralFunction& psi_hat) {
  if (spatial.d() != g.d || psi_hat.grid.d() != g.d) throw Error("grid mismatch");
}

}  // namespace

WaveletCoefficients analyze(const GroupModel& g, const Signal& f, const SpectralFunction& psi_hat,
                            const QuadratureRule& q) {
  check_inputs(g, f.grid, psi_hat);
  Fft fft(f.grid);
  const std::size_t n = fft.size();
  std::vector<cplx> fhat(n), prod(n);
  fft.forward(f.values, fhat);
  DilatedSampler sampler(psi_hat, fft.frequency());
  std::vector<double> re(n), im(n);
  const auto& K = simd::kernels();

  WaveletCoefficients w;
  w.grid = f.grid;
  w.h_nodes = q;
  w.planes.resize(q.size());
  w.group_measure_weights.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    sampler.sample(q.elements[i].matrix, 1.0, re, im);
    K.mul_conj(reinterpret_cast<const double*>(fhat.data()), re.data(), im.data(), std::sqrt(q.delta[i]),
               reinterpret_cast<double*>(prod.data()), n);
    w.planes[i].resize(n);
    fft.inverse(prod, w.planes[i]);
    w.group_measure_weights[i] = q.weights[i] / q.delta[i];
  }
  return w;
}

double coefficient_norm(const WaveletCoefficients& w) {
  const auto& K = simd::kernels();
  double s = 0.0;
  for (std::size_t i = 0; i < w.planes.size(); ++i)
    s += w.group_measure_weights[i] * K.norm_sq(reinterpret_cast<const double*>(w.planes[i].data()), w.planes[i].size());
  return std::sqrt(s * w.grid.cell_volume());
}

Signal synthesize(const GroupModel& g, const WaveletCoefficients& w, const SpectralFunction& psi_hat,
                  const QuadratureRule& q) {
  check_inputs(g, w.grid, psi_hat);
  if (q.size() != w.planes.size()) throw Error("coefficient/node count mismatch");
  Fft fft(w.grid);
  const std::size_t n = fft.size();
  DilatedSampler sampler(psi_hat, fft.frequency());
  std::vector<double> re(n), im(n);
  std::vector<cplx> acc(n), P(n);
  const auto& K = simd::kernels();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (w.planes[i].size() != n) throw Error("grid mismatch");
    fft.forward(w.planes[i], P);
    sampler.sample(q.elements[i].matrix, 1.0, re, im);
    K.mul_accumulate(reinterpret_cast<double*>(acc.data()), reinterpret_cast<const double*>(P.data()), re.data(),
                     im.data(), q.weights[i] / std::sqrt(q.delta[i]), n);
  }
  Signal out = Signal::zeros(w.grid);
  fft.inverse(acc, out.values);
  return out;
}

json RoundtripResult::to_json() const {
  return {{"signal_norm", signal_norm},   {"coefficient_norm", coefficient_norm},
          {"rel_err", rel_err},           {"isometry_defect", isometry_defect},
          {"edge_max", edge_max},         {"nodes", nodes}};
}

namespace {

double edge_max(const Signal& f) {
  double m = 0.0;
  for (std::size_t k = 0; k < f.grid.size(); ++k) {
    const auto idx = f.grid.unflatten(k);
    for (int a = 0; a < f.grid.d(); ++a)
      if (idx[a] == 0 || idx[a] == f.grid.shape[a] - 1) {
        m = std::max(m, std::abs(f.values[k]));
        break;
      }
  }
  return m;
}

}  // namespace

RoundtripResult roundtrip(const GroupModel& g, const Signal& f, const SpectralFunction& psi_hat, const QuadratureRule& q,
                          const std::function<void(std::size_t, std::span<const cplx>)>& keep) {
  check_inputs(g, f.grid, psi_hat);
  Fft fft(f.grid);
  const std::size_t n = fft.size();
  std::vector<cplx> fhat(n), prod(n), plane(n), P(n), acc(n);
  fft.forward(f.values, fhat);
  DilatedSampler sampler(psi_hat, fft.frequency());
  std::vector<double> re(n), im(n);
  const auto& K = simd::kernels();

  double norm_sq = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    sampler.sample(q.elements[i].matrix, 1.0, re, im);
    const double sd = std::sqrt(q.delta[i]);
    K.mul_conj(reinterpret_cast<const double*>(fhat.data()), re.data(), im.data(), sd,
               reinterpret_cast<double*>(prod.data()), n);
    fft.inverse(prod, plane);
    if (keep) keep(i, plane);
    const double wi = q.weights[i] / q.delta[i];
    norm_sq += wi * K.norm_sq(reinterpret_cast<const double*>(plane.data()), n);
    fft.forward(plane, P);
    K.mul_accumulate(reinterpret_cast<double*>(acc.data()), reinterpret_cast<const double*>(P.data()), re.data(),
                     im.data(), wi * sd, n);
  }

  RoundtripResult r;
  r.nodes = q.size();
  r.reconstruction = Signal::zeros(f.grid);
  fft.inverse(acc, r.reconstruction.values);
  r.signal_norm = f.l2_norm();
  r.coefficient_norm = std::sqrt(norm_sq * f.grid.cell_volume());
  Signal diff = r.reconstruction;
  for (std::size_t k = 0; k < n; ++k) diff.values[k] -= f.values[k];
  r.rel_err = r.signal_norm > 0.0 ? diff.l2_norm() / r.signal_norm : diff.l2_norm();
  r.isometry_defect = r.signal_norm > 0.0 ? std::abs(r.coefficient_norm / r.signal_norm - 1.0) : r.coefficient_norm;
  r.edge_max = edge_max(f);
  return r;
}

void export_planes(const std::filesystem::path& dir, const WaveletCoefficients& w, std::span<const std::size_t> nodes,
                   const json& config) {
  std::filesystem::create_directories(dir);
  for (std::size_t i : nodes) {
    if (i >= w.planes.size()) throw Error("node index " + std::to_string(i) + " out of range");
    json header = {{"kind", "wavelet_plane"},
                   {"node", i},
                   {"chart_coords", w.h_nodes.nodes[i]},
                   {"group_measure_weight", w.group_measure_weights[i]},
                   {"config", config}};
    write_raster(dir / ("plane_" + std::to_string(i) + ".cwr"), w.grid, w.planes[i], header);
  }
}

}  // namespace calwav
