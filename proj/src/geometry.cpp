#include "sphqmc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace sphqmc {

namespace {
constexpr double kUnitTol = 1e-12;
}

UnitPoint::UnitPoint(double px, double py, double pz) : x(px), y(py), z(pz) {
  const double n2 = x * x + y * y + z * z;
  if (!std::isfinite(n2) || n2 <= 0.0) {
    throw std::invalid_argument("UnitPoint: non-finite or zero vector");
  }
  if (std::abs(n2 - 1.0) > kUnitTol) {
    const double inv = 1.0 / std::sqrt(n2);
    x *= inv;
    y *= inv;
    z *= inv;
  }
}

double UnitPoint::chordal_distance(const UnitPoint& o) const {
  const double dx = x - o.x, dy = y - o.y, dz = z - o.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Configuration::Configuration(std::vector<UnitPoint> pts)
    : points(std::move(pts)) {
  if (points.empty()) {
    throw std::invalid_argument("Configuration: needs at least one point");
  }
}

UnitPoint inverse_stereographic(const PlanarPoint& z) {
  if (!std::isfinite(z.re) || !std::isfinite(z.im)) {
    throw std::invalid_argument("inverse_stereographic: non-finite input");
  }
  const double r2 = z.re * z.re + z.im * z.im;
  if (r2 > 1e18) {
    // Work with 1/r^2 to avoid overflow near the point at infinity.
    const double ir = 1.0 / r2;
    const double denom = ir + 1.0;
    return UnitPoint(2.0 * (z.re * ir) / denom, 2.0 * (z.im * ir) / denom,
                     (1.0 - ir) / denom);
  }
  const double denom = 1.0 + r2;
  return UnitPoint(2.0 * z.re / denom, 2.0 * z.im / denom,
                   (r2 - 1.0) / denom);
}

std::optional<PlanarPoint> stereographic(const UnitPoint& p) {
  const double denom = 1.0 - p.z;
  if (denom <= 0.0 || !std::isfinite(1.0 / denom)) {
    return std::nullopt;  // pole: point at infinity
  }
  return PlanarPoint{p.x / denom, p.y / denom};
}

Rotation::Rotation(const std::array<double, 9>& m) : m_(m) {
  // Orthogonality: R R^T = I within 1e-10.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += m_[3 * i + k] * m_[3 * j + k];
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(dot - want) > 1e-10) {
        throw std::invalid_argument("Rotation: matrix is not orthogonal");
      }
    }
  }
  const double det =
      m_[0] * (m_[4] * m_[8] - m_[5] * m_[7]) -
      m_[1] * (m_[3] * m_[8] - m_[5] * m_[6]) +
      m_[2] * (m_[3] * m_[7] - m_[4] * m_[6]);
  if (std::abs(det - 1.0) > 1e-10) {
    throw std::invalid_argument("Rotation: determinant is not +1");
  }
}

Rotation Rotation::identity() {
  return Rotation({1, 0, 0, 0, 1, 0, 0, 0, 1});
}

Rotation Rotation::about_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Rotation({c, -s, 0, s, c, 0, 0, 0, 1});
}

Rotation Rotation::about_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Rotation({c, 0, s, 0, 1, 0, -s, 0, c});
}

Rotation Rotation::random(RngStream& rng) {
  const Rotation a = about_z(rng.uniform(0.0, 2.0 * M_PI));
  const Rotation b = about_y(std::acos(rng.uniform(-1.0, 1.0)));
  const Rotation c = about_z(rng.uniform(0.0, 2.0 * M_PI));
  // compose c * b * a
  std::array<double, 9> ba{}, cba{};
  const auto& mb = b.entries();
  const auto& ma = a.entries();
  const auto& mc = c.entries();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += mb[3 * i + k] * ma[3 * k + j];
      ba[3 * i + j] = s;
    }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += mc[3 * i + k] * ba[3 * k + j];
      cba[3 * i + j] = s;
    }
  return Rotation(cba);
}

UnitPoint Rotation::apply(const UnitPoint& p) const {
  return UnitPoint(m_[0] * p.x + m_[1] * p.y + m_[2] * p.z,
                   m_[3] * p.x + m_[4] * p.y + m_[5] * p.z,
                   m_[6] * p.x + m_[7] * p.y + m_[8] * p.z);
}

Configuration apply_rotation(const Configuration& c, const Rotation& r) {
  std::vector<UnitPoint> out;
  out.reserve(c.n());
  for (const auto& p : c.points) out.push_back(r.apply(p));
  return Configuration(std::move(out));
}

std::vector<double> pairwise_cosines(const Configuration& c) {
  const std::size_t n = c.n();
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::clamp(c.points[i].dot(c.points[j]), -1.0, 1.0);
      g[i * n + j] = d;
      g[j * n + i] = d;
    }
  }
  return g;
}

std::vector<double> pairwise_cosines_upper(const Configuration& c) {
  const std::size_t n = c.n();
  std::vector<double> out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out.push_back(std::clamp(c.points[i].dot(c.points[j]), -1.0, 1.0));
    }
  }
  return out;
}

void write_csv(const Configuration& c, std::ostream& os) {
  os << "x,y,z\n";
  char buf[96];
  for (const auto& p : c.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.x, p.y, p.z);
    os << buf;
  }
}

Configuration read_csv(std::istream& is) {
  std::string line;
  std::vector<UnitPoint> pts;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("x,", 0) == 0) continue;  // header
    double v[3];
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      std::size_t next = (k < 2) ? line.find(',', pos) : line.size();
      if (next == std::string::npos) {
        throw std::runtime_error("configuration CSV: malformed row at line " +
                                 std::to_string(lineno));
      }
      try {
        v[k] = std::stod(line.substr(pos, next - pos));
      } catch (const std::exception&) {
        throw std::runtime_error("configuration CSV: bad number at line " +
                                 std::to_string(lineno));
      }
      pos = next + 1;
    }
    pts.emplace_back(v[0], v[1], v[2]);
  }
  if (pts.empty()) {
    throw std::runtime_error("configuration CSV: no points");
  }
  return Configuration(std::move(pts));
}

Configuration read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_csv(f);
}

void write_csv_file(const Configuration& c, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(c, f);
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string to_json(const Configuration& c) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : c.points) arr.push_back({p.x, p.y, p.z});
  return arr.dump();
}

Configuration configuration_from_json(const std::string& text) {
  const auto arr = nlohmann::json::parse(text);
  if (!arr.is_array() || arr.empty()) {
    throw std::runtime_error("configuration JSON: expected non-empty array");
  }
  std::vector<UnitPoint> pts;
  pts.reserve(arr.size());
  for (const auto& t : arr) {
    if (!t.is_array() || t.size() != 3) {
      throw std::runtime_error("configuration JSON: expected [x,y,z] triple");
    }
    pts.emplace_back(t[0].get<double>(), t[1].get<double>(),
                     t[2].get<double>());
  }
  return Configuration(std::move(pts));
}

}  // namespace sphqmc
