#ifndef SCHRODLAB_GRID_HPP
#define SCHRODLAB_GRID_HPP

#include <memory>

#include "schrodlab/base.hpp"

namespace schrodlab {

// Periodic box [-L, L)^n with N nodes per axis.  Physical nodes are
// x_j = -L + 2Lj/N; the frequency lattice is xi_k = pi k / L for integer
// k in [-N/2, N/2).  Spectral data is stored in wrapped bin order (bin b on
// an axis carries k = b for b < N/2 and k = b - N for b >= N/2), so bin
// N/2 is the unpaired Nyquist row.
struct BoxGrid {
  int dim = 2;
  double half_length = 20.0;  // L
  int points_per_axis = 64;   // N, even

  std::size_t total() const;
  double spacing() const { return 2.0 * half_length / points_per_axis; }
  double cell_volume() const;
  double freq_spacing() const { return M_PI / half_length; }
  double freq_cell_volume() const;

  double node_coord(int j) const { return -half_length + spacing() * j; }
  int freq_index(int bin) const {
    return bin < points_per_axis / 2 ? bin : bin - points_per_axis;
  }
  double freq_coord(int bin) const { return freq_spacing() * freq_index(bin); }

  std::array<int, kMaxDim> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, kMaxDim>& idx) const;
  Vec node(std::size_t flat) const;
  Vec freq(std::size_t flat) const;
  bool is_nyquist(std::size_t flat) const;

  bool operator==(const BoxGrid& o) const {
    return dim == o.dim && half_length == o.half_length &&
           points_per_axis == o.points_per_axis;
  }
};

// Validates dim in [1,3], N even and >= 4, L > 0.
BoxGrid make_grid(int dim, double half_length, int points_per_axis);

// A complex field sampled on the nodes of a BoxGrid.  The spectral cache
// holds the unitary-normalized transform in bin order; it is computed once
// on demand and shared read-only afterwards.
struct GridField {
  BoxGrid grid;
  std::vector<Complex> values;  // row-major over axes
  mutable std::shared_ptr<const std::vector<Complex>> spectral_cache;
};

GridField make_field(const BoxGrid& grid,
                     const std::function<Complex(const Vec&)>& f);
GridField zero_field(const BoxGrid& grid);

// Unitary transforms: u_hat(xi_k) = sum_j u(x_j) e^{-i x_j.xi_k}
// (cell volume)/(2pi)^{n/2}; the inverse mirrors it with the frequency cell
// volume.  Round trip is exact up to rounding.
std::vector<Complex> forward_transform(const BoxGrid& grid,
                                       const std::vector<Complex>& values);
std::vector<Complex> inverse_transform(const BoxGrid& grid,
                                       const std::vector<Complex>& spectrum);

// Computes and caches the spectrum of the field.
const std::vector<Complex>& spectrum(const GridField& u);
GridField field_from_spectrum(const BoxGrid& grid, std::vector<Complex> spec);

// Discrete L2 norm sqrt(sum |u|^2 * cell volume); the spectral version uses
// the frequency cell volume.  Parseval ties the two together.
double l2_norm(const GridField& u);
double spectral_l2_norm(const BoxGrid& grid, const std::vector<Complex>& spec);
double parseval_defect(const GridField& u);  // relative mismatch of the two norms

// Mass fraction in the outer 10% shell of the box (per-axis distance to the
// boundary below 10% of L).  Runs are flagged when it reaches 1e-8.
struct BoundaryReport {
  double fraction = 0.0;
  bool flagged = false;
};
BoundaryReport boundary_report(const GridField& u);

// Snapshot persistence: little-endian interleaved doubles plus a JSON
// sidecar with the grid spec, a time stamp field, and the L2 norm.
void save_field(const GridField& u, const std::string& blob_path,
                const std::string& sidecar_path, double time_stamp = 0.0);
GridField load_field(const std::string& blob_path, const std::string& sidecar_path);

}  // namespace schrodlab

#endif  // SCHRODLAB_GRID_HPP
