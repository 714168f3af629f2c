#include "cavpend/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "cavpend/errors.hpp"

namespace cavpend {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

// cos/sin of 2*pi*j/n, reduced to the first quadrant so that mirrored indices
// produce bit-identical mirrored coordinates. Requires n even.
Vec2 ring_direction(int j, int n) {
  double sx = 1.0;
  double sy = 1.0;
  if (2 * j > n) {  // lower half-plane: mirror about the x-axis
    j = n - j;
    sy = -1.0;
  }
  if (4 * j > n) {  // left half-plane: mirror about the y-axis
    j = n / 2 - j;
    sx = -1.0;
  }
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
  return {sx * std::cos(angle), sy * std::sin(angle)};
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nv = num_vertices();
  const int nt = num_elements();
  if (nt == 0) throw MeshError("mesh has no triangles");

  areas_.resize(nt);
  element_faces_.resize(nt);
  face_signs_.resize(nt);

  // Edge key (min, max) -> face index.
  std::map<std::pair<int, int>, int> edge_index;
  std::vector<int> edge_count;

  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      if (tri[i] < 0 || tri[i] >= nv) {
        throw MeshError("triangle " + std::to_string(t) + " references vertex " +
                        std::to_string(tri[i]) + " outside [0, " + std::to_string(nv) + ")");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
    }
    const double a = signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    if (a < 0.0) {
      throw MeshError("triangle " + std::to_string(t) + " is clockwise (signed area " +
                      std::to_string(a) + ")");
    }
    if (a == 0.0) throw MeshError("triangle " + std::to_string(t) + " is degenerate");
    areas_[t] = a;
    total_area_ += a;

    for (int i = 0; i < 3; ++i) {
      const int va = tri[(i + 1) % 3];
      const int vb = tri[(i + 2) % 3];
      const auto key = std::minmax(va, vb);
      auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, num_faces());
      if (inserted) {
        Face f;
        f.vertices = {va, vb};
        f.elements = {t, -1};
        faces_.push_back(f);
        edge_count.push_back(1);
        element_faces_[t][i] = it->second;
        face_signs_[t][i] = 1.0;
      } else {
        const int fi = it->second;
        if (++edge_count[fi] > 2) {
          throw MeshError("non-manifold edge (" + std::to_string(key.first) + ", " +
                          std::to_string(key.second) + ") shared by more than two triangles");
        }
        Face& f = faces_[fi];
        if (f.vertices[0] == va) {
          throw MeshError("triangles " + std::to_string(f.elements[0]) + " and " +
                          std::to_string(t) + " traverse edge (" + std::to_string(va) + ", " +
                          std::to_string(vb) + ") in the same direction");
        }
        f.elements[1] = t;
        element_faces_[t][i] = fi;
        face_signs_[t][i] = -1.0;
      }
    }
    const Vec2& p0 = vertices_[tri[0]];
    const Vec2& p1 = vertices_[tri[1]];
    const Vec2& p2 = vertices_[tri[2]];
    h_max_ = std::max({h_max_, (p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
  }

  for (Face& f : faces_) {
    const Vec2& a = vertices_[f.vertices[0]];
    const Vec2& b = vertices_[f.vertices[1]];
    const Vec2 t = b - a;
    f.length = t.norm();
    f.midpoint = 0.5 * (a + b);
    f.normal = Vec2(t.y(), -t.x()) / f.length;
    f.boundary = f.elements[1] < 0;
    if (f.boundary) ++num_boundary_faces_;
  }
}

Vec2 Mesh::centroid(int element) const {
  const auto& tri = triangles_[element];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

Mesh generate_disk_mesh(const Vec2& center, double radius, double target_h) {
  if (!(radius > 0.0)) throw InvalidParameter("disk radius must be positive");
  if (!(target_h > 0.0)) throw InvalidParameter("target_h must be positive");
  if (target_h >= radius) {
    throw InvalidParameter("target_h must be smaller than the disk radius");
  }
  const int rings = static_cast<int>(std::ceil(radius / target_h - 1e-12));

  std::vector<Vec2> vertices;
  std::vector<int> ring_start(rings + 1);
  vertices.push_back(center);
  ring_start[0] = 0;
  for (int k = 1; k <= rings; ++k) {
    ring_start[k] = static_cast<int>(vertices.size());
    const int n = 6 * k;
    const double r = radius * static_cast<double>(k) / static_cast<double>(rings);
    for (int j = 0; j < n; ++j) vertices.push_back(center + r * ring_direction(j, n));
  }

  std::vector<std::array<int, 3>> triangles;
  for (int j = 0; j < 6; ++j) {
    triangles.push_back({0, ring_start[1] + j, ring_start[1] + (j + 1) % 6});
  }
  for (int k = 2; k <= rings; ++k) {
    const int n_in = 6 * (k - 1);
    const int n_out = 6 * k;
    auto in = [&](int i) { return ring_start[k - 1] + i % n_in; };
    auto out = [&](int j) { return ring_start[k] + j % n_out; };
    int i = 0;
    int j = 0;
    while (i < n_in || j < n_out) {
      // Advance along the ring whose next vertex has the smaller angle; ties
      // (radially aligned vertices) advance the inner ring first.
      const bool advance_outer =
          i == n_in || (j < n_out && static_cast<long>(j + 1) * n_in < static_cast<long>(i + 1) * n_out);
      if (advance_outer) {
        triangles.push_back({in(i), out(j), out(j + 1)});
        ++j;
      } else {
        triangles.push_back({in(i), out(j), in(i + 1)});
        ++i;
      }
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

Mesh generate_rectangle_mesh(const Vec2& lo, const Vec2& hi, int nx, int ny) {
  if (nx < 1 || ny < 1) throw InvalidParameter("rectangle mesh needs nx, ny >= 1");
  if (!(hi.x() > lo.x() && hi.y() > lo.y())) throw InvalidParameter("rectangle bounds not ordered");
  std::vector<Vec2> vertices;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      vertices.emplace_back(lo.x() + (hi.x() - lo.x()) * i / nx, lo.y() + (hi.y() - lo.y()) * j / ny);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

namespace {

// Next non-comment, non-blank line; false at EOF.
bool next_data_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line_no, const std::string& what) {
  throw MeshError(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  std::string line;
  int line_no = 0;
  if (!next_data_line(in, line, line_no)) parse_fail(path, line_no, "missing header");
  long nv = -1;
  long nt = -1;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> nt) || nv < 3 || nt < 1) parse_fail(path, line_no, "bad header, expected `nv nt`");
  }
  std::vector<Vec2> vertices(nv);
  for (long v = 0; v < nv; ++v) {
    if (!next_data_line(in, line, line_no)) parse_fail(path, line_no, "unexpected end of vertex block");
    std::istringstream ss(line);
    double x = 0.0;
    double y = 0.0;
    if (!(ss >> x >> y)) parse_fail(path, line_no, "bad vertex line");
    vertices[v] = Vec2(x, y);
  }
  std::vector<std::array<int, 3>> triangles(nt);
  for (long t = 0; t < nt; ++t) {
    if (!next_data_line(in, line, line_no)) parse_fail(path, line_no, "unexpected end of triangle block");
    std::istringstream ss(line);
    if (!(ss >> triangles[t][0] >> triangles[t][1] >> triangles[t][2])) {
      parse_fail(path, line_no, "bad triangle line");
    }
  }
  if (next_data_line(in, line, line_no)) parse_fail(path, line_no, "trailing data after triangle block");
  return Mesh(std::move(vertices), std::move(triangles));
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file " + path.string());
  out << "# nv nt, vertices (x y), triangles (i j k, counter-clockwise)\n";
  out << mesh.num_vertices() << ' ' << mesh.num_elements() << '\n';
  out << std::setprecision(17);
  for (const Vec2& v : mesh.vertices()) out << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!out) throw MeshError("failed writing mesh file " + path.string());
}

}  // namespace cavpend
