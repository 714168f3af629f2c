#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace cavpend {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// An edge of the triangulation.
///
/// `elements[0]` is always the lower adjacent triangle index; `elements[1]`
/// is the higher one, or -1 on the boundary. `normal` points out of
/// `elements[0]`, so boundary normals point out of the domain.
struct Face {
  std::array<int, 2> vertices{};
  std::array<int, 2> elements{-1, -1};
  Vec2 midpoint = Vec2::Zero();
  double length = 0.0;
  Vec2 normal = Vec2::Zero();
  bool boundary = false;
};

/// Conforming triangulation with full edge topology.
///
/// Immutable once built. Local face `i` of a triangle is the edge opposite
/// its local vertex `i`.
class Mesh {
 public:
  Mesh() = default;

  /// Validates the connectivity and builds face topology.
  /// Throws MeshError on flipped or degenerate triangles, edges shared by more
  /// than two triangles, or inconsistently oriented neighbours.
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Face>& faces() const { return faces_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(triangles_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_boundary_faces() const { return num_boundary_faces_; }

  double area(int element) const { return areas_[element]; }
  const std::vector<double>& element_areas() const { return areas_; }
  double total_area() const { return total_area_; }
  Vec2 centroid(int element) const;

  /// Global face index of local face `local` of `element`.
  int element_face(int element, int local) const { return element_faces_[element][local]; }
  /// +1 when the stored face normal is outward for `element`, -1 otherwise.
  double face_sign(int element, int local) const { return face_signs_[element][local]; }
  /// Outward unit normal of local face `local` of `element`.
  Vec2 outward_normal(int element, int local) const {
    return face_sign(element, local) * faces_[element_face(element, local)].normal;
  }

  double h_max() const { return h_max_; }

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Face> faces_;
  std::vector<std::array<int, 3>> element_faces_;
  std::vector<std::array<double, 3>> face_signs_;
  std::vector<double> areas_;
  double total_area_ = 0.0;
  double h_max_ = 0.0;
  int num_boundary_faces_ = 0;
};

/// Concentric-ring triangulation of a disk: ring k carries 6k vertices and
/// the strip between consecutive rings is filled by merging the two angular
/// sequences. The result is mirror symmetric about both axes through the center.
Mesh generate_disk_mesh(const Vec2& center, double radius, double target_h);

/// Structured nx-by-ny rectangle mesh, each cell split along its diagonal.
Mesh generate_rectangle_mesh(const Vec2& lo, const Vec2& hi, int nx, int ny);

/// Text format: `nv nt`, then nv lines `x y`, then nt lines `i j k`
/// (0-based, counter-clockwise). Lines starting with `#` are comments.
Mesh load_mesh(const std::filesystem::path& path);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace cavpend
