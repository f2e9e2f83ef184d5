#include "schrodlab/grid.hpp"

#include <fftw3.h>

#include <fstream>
#include <json.hpp>
#include <mutex>

namespace schrodlab {

std::size_t BoxGrid::total() const {
  std::size_t t = 1;
  for (int a = 0; a < dim; ++a) t *= static_cast<std::size_t>(points_per_axis);
  return t;
}

double BoxGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing();
  return v;
}

double BoxGrid::freq_cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= freq_spacing();
  return v;
}

std::array<int, kMaxDim> BoxGrid::unflatten(std::size_t flat) const {
  std::array<int, kMaxDim> idx{};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % points_per_axis);
    flat /= points_per_axis;
  }
  return idx;
}

std::size_t BoxGrid::flatten(const std::array<int, kMaxDim>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a)
    flat = flat * points_per_axis + static_cast<std::size_t>(idx[a]);
  return flat;
}

Vec BoxGrid::node(std::size_t flat) const {
  std::array<int, kMaxDim> idx = unflatten(flat);
  Vec x{};
  for (int a = 0; a < dim; ++a) x[a] = node_coord(idx[a]);
  return x;
}

Vec BoxGrid::freq(std::size_t flat) const {
  std::array<int, kMaxDim> idx = unflatten(flat);
  Vec xi{};
  for (int a = 0; a < dim; ++a) xi[a] = freq_coord(idx[a]);
  return xi;
}

bool BoxGrid::is_nyquist(std::size_t flat) const {
  std::array<int, kMaxDim> idx = unflatten(flat);
  for (int a = 0; a < dim; ++a)
    if (idx[a] == points_per_axis / 2) return true;
  return false;
}

BoxGrid make_grid(int dim, double half_length, int points_per_axis) {
  if (dim < 1 || dim > kMaxDim) throw ArgumentError("grid dimension must be 1..3");
  if (half_length <= 0.0) throw ArgumentError("grid half-length must be positive");
  if (points_per_axis < 4 || points_per_axis % 2 != 0)
    throw ArgumentError("points per axis must be even and >= 4");
  BoxGrid g;
  g.dim = dim;
  g.half_length = half_length;
  g.points_per_axis = points_per_axis;
  return g;
}

GridField make_field(const BoxGrid& grid,
                     const std::function<Complex(const Vec&)>& f) {
  GridField u;
  u.grid = grid;
  u.values.resize(grid.total());
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    Complex v = f(grid.node(i));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw EvalError("non-finite field value", grid.node(i));
    u.values[i] = v;
  }
  return u;
}

GridField zero_field(const BoxGrid& grid) {
  GridField u;
  u.grid = grid;
  u.values.assign(grid.total(), Complex(0.0, 0.0));
  return u;
}

namespace {

// FFTW planning is not thread safe; execution of a fresh plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Raw DFT sum_j u_j e^{-sign * 2 pi i j.k / N} in bin order.
std::vector<Complex> raw_dft(const BoxGrid& grid, const std::vector<Complex>& in,
                             int sign) {
  std::size_t total = grid.total();
  std::vector<Complex> out(total);
  std::array<int, kMaxDim> n{};
  for (int a = 0; a < grid.dim; ++a) n[a] = grid.points_per_axis;
  // fftw_complex is layout-compatible with std::complex<double>.
  auto* src = const_cast<fftw_complex*>(
      reinterpret_cast<const fftw_complex*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(grid.dim, n.data(), src, dst, sign,
                         FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  if (plan == nullptr) throw LabError("FFT planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

// e^{-i x_j . xi_k} = (-1)^{sum k_a} e^{-2 pi i j.k / N}: the node offset -L
// contributes a parity phase per axis.
double parity_phase(const BoxGrid& grid, std::size_t flat) {
  std::array<int, kMaxDim> idx = grid.unflatten(flat);
  int s = 0;
  for (int a = 0; a < grid.dim; ++a) s += grid.freq_index(idx[a]);
  return (s % 2 == 0) ? 1.0 : -1.0;
}

double two_pi_pow(int dim) {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= 2.0 * M_PI;
  return std::sqrt(v);
}

}  // namespace

std::vector<Complex> forward_transform(const BoxGrid& grid,
                                       const std::vector<Complex>& values) {
  if (values.size() != grid.total()) throw ArgumentError("field size mismatch");
  std::vector<Complex> spec = raw_dft(grid, values, FFTW_FORWARD);
  double coef = grid.cell_volume() / two_pi_pow(grid.dim);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= coef * parity_phase(grid, k);
  return spec;
}

std::vector<Complex> inverse_transform(const BoxGrid& grid,
                                       const std::vector<Complex>& spectrum) {
  if (spectrum.size() != grid.total()) throw ArgumentError("spectrum size mismatch");
  std::vector<Complex> tmp(spectrum.size());
  for (std::size_t k = 0; k < tmp.size(); ++k)
    tmp[k] = spectrum[k] * parity_phase(grid, k);
  std::vector<Complex> out = raw_dft(grid, tmp, FFTW_BACKWARD);
  double coef = grid.freq_cell_volume() / two_pi_pow(grid.dim);
  for (Complex& v : out) v *= coef;
  return out;
}

const std::vector<Complex>& spectrum(const GridField& u) {
  if (!u.spectral_cache)
    u.spectral_cache = std::make_shared<const std::vector<Complex>>(
        forward_transform(u.grid, u.values));
  return *u.spectral_cache;
}

GridField field_from_spectrum(const BoxGrid& grid, std::vector<Complex> spec) {
  GridField u;
  u.grid = grid;
  u.values = inverse_transform(grid, spec);
  u.spectral_cache =
      std::make_shared<const std::vector<Complex>>(std::move(spec));
  return u;
}

double l2_norm(const GridField& u) {
  double s = 0.0;
  for (const Complex& v : u.values) s += std::norm(v);
  return std::sqrt(s * u.grid.cell_volume());
}

double spectral_l2_norm(const BoxGrid& grid, const std::vector<Complex>& spec) {
  double s = 0.0;
  for (const Complex& v : spec) s += std::norm(v);
  return std::sqrt(s * grid.freq_cell_volume());
}

double parseval_defect(const GridField& u) {
  double a = l2_norm(u);
  double b = spectral_l2_norm(u.grid, spectrum(u));
  double scale = std::max(a, b);
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

BoundaryReport boundary_report(const GridField& u) {
  const BoxGrid& g = u.grid;
  double margin = 0.1 * g.half_length;
  double total = 0.0, shell = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    double m = std::norm(u.values[i]);
    total += m;
    Vec x = g.node(i);
    bool near = false;
    for (int a = 0; a < g.dim; ++a)
      if (g.half_length - std::abs(x[a]) < margin) near = true;
    if (near) shell += m;
  }
  BoundaryReport r;
  r.fraction = total > 0.0 ? shell / total : 0.0;
  r.flagged = r.fraction >= 1e-8;
  return r;
}

void save_field(const GridField& u, const std::string& blob_path,
                const std::string& sidecar_path, double time_stamp) {
  std::ofstream blob(blob_path, std::ios::binary);
  if (!blob) throw LabError("cannot open field blob for writing: " + blob_path);
  for (const Complex& v : u.values) {
    double re = v.real(), im = v.imag();
    blob.write(reinterpret_cast<const char*>(&re), sizeof(double));
    blob.write(reinterpret_cast<const char*>(&im), sizeof(double));
  }
  blob.close();

  nlohmann::json side;
  side["dim"] = u.grid.dim;
  side["half_length"] = u.grid.half_length;
  side["points_per_axis"] = u.grid.points_per_axis;
  side["time_stamp"] = time_stamp;
  side["l2_norm"] = l2_norm(u);
  side["value_count"] = u.values.size();
  side["format"] = "complex-interleaved-le-f64";
  std::ofstream sc(sidecar_path);
  if (!sc) throw LabError("cannot open field sidecar for writing: " + sidecar_path);
  sc << side.dump(2) << "\n";
}

GridField load_field(const std::string& blob_path, const std::string& sidecar_path) {
  std::ifstream sc(sidecar_path);
  if (!sc) throw LabError("cannot open field sidecar: " + sidecar_path);
  nlohmann::json side = nlohmann::json::parse(sc);
  GridField u;
  u.grid = make_grid(side.at("dim").get<int>(), side.at("half_length").get<double>(),
                     side.at("points_per_axis").get<int>());
  std::size_t count = side.at("value_count").get<std::size_t>();
  if (count != u.grid.total()) throw LabError("field sidecar count mismatch");
  u.values.resize(count);
  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) throw LabError("cannot open field blob: " + blob_path);
  for (Complex& v : u.values) {
    double re = 0.0, im = 0.0;
    blob.read(reinterpret_cast<char*>(&re), sizeof(double));
    blob.read(reinterpret_cast<char*>(&im), sizeof(double));
    v = Complex(re, im);
  }
  if (!blob) throw LabError("field blob truncated: " + blob_path);
  return u;
}

}  // namespace schrodlab
