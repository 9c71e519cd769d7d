#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphqmc/rng.hpp"

namespace sphqmc {

// A point in the complex plane, viewed as an eigenvalue before projection.
struct PlanarPoint {
  double re = 0.0;
  double im = 0.0;
};

// A unit vector in R^3.  Constructors renormalise so that
// x^2 + y^2 + z^2 = 1 holds to within 1e-12.
struct UnitPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  UnitPoint() = default;
  UnitPoint(double px, double py, double pz);

  double dot(const UnitPoint& o) const { return x * o.x + y * o.y + z * o.z; }
  // Chordal (Euclidean) distance |p - q|.
  double chordal_distance(const UnitPoint& o) const;
};

// An ordered N-point configuration on the sphere, N >= 1.
struct Configuration {
  std::vector<UnitPoint> points;

  Configuration() = default;
  explicit Configuration(std::vector<UnitPoint> pts);

  std::size_t n() const { return points.size(); }
};

// Plane -> sphere, z |-> (2 Re z, 2 Im z, |z|^2 - 1) / (1 + |z|^2).
// The plane origin maps to (0,0,-1); |z| -> infinity approaches (0,0,1).
UnitPoint inverse_stereographic(const PlanarPoint& z);

// Sphere -> plane, exact inverse of the above.  The pole (0,0,1) is the
// image of the point at infinity and yields nullopt.
std::optional<PlanarPoint> stereographic(const UnitPoint& p);

// Proper rotation (orthogonal, det +1 within 1e-10; the constructor rejects
// anything else).
class Rotation {
 public:
  // Row-major 3x3 entries.
  explicit Rotation(const std::array<double, 9>& m);

  static Rotation identity();
  static Rotation about_z(double angle);
  static Rotation about_y(double angle);
  // Haar-ish random rotation built from three random axis rotations.
  static Rotation random(RngStream& rng);

  UnitPoint apply(const UnitPoint& p) const;
  const std::array<double, 9>& entries() const { return m_; }

 private:
  std::array<double, 9> m_;
};

Configuration apply_rotation(const Configuration& c, const Rotation& r);

// Full n x n Gram matrix of <x_i, x_j>, row-major, entries clamped to
// [-1, 1], diagonal exactly 1.
std::vector<double> pairwise_cosines(const Configuration& c);

// Off-diagonal cosines only, pairs (i,j) with i < j in lexicographic order.
// This is the shared input of all pair-sum metric kernels.
std::vector<double> pairwise_cosines_upper(const Configuration& c);

// --- serialization ---------------------------------------------------------

// CSV with header "x,y,z", one point per line, full double precision.
void write_csv(const Configuration& c, std::ostream& os);
Configuration read_csv(std::istream& is);
Configuration read_csv_file(const std::string& path);
void write_csv_file(const Configuration& c, const std::string& path);

// JSON array of [x,y,z] triples.
std::string to_json(const Configuration& c);
Configuration configuration_from_json(const std::string& text);

}  // namespace sphqmc
