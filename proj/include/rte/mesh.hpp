#pragma once

#include <array>
#include <vector>

namespace rte {

// Faces of a cell; also used for the four sides of the domain.
enum class Face { Left = 0, Right = 1, Bottom = 2, Top = 3 };

struct Interface {
  bool boundary = false;
  bool vertical = false;  // normal along x
  // Interior: minus is the cell on the negative side of the normal axis.
  // Boundary: minus holds the owning cell and plus is -1.
  int minus = -1;
  int plus = -1;
  Face face = Face::Left;  // face of `minus` lying on this interface
  double mid_x = 0.0;
  double mid_y = 0.0;
};

// Uniform I x I mesh on [0,1]^2. Cells are numbered j * I + i (i along x).
// Interfaces: vertical ones first (x = i h, i = 0..I, ordered left to right,
// then bottom to top), followed by horizontal ones (y = j h, ordered the
// same way).
class Mesh {
 public:
  explicit Mesh(int I);

  int I() const { return I_; }
  double h() const { return h_; }
  int cell_count() const { return I_ * I_; }
  int cell(int i, int j) const { return j * I_ + i; }
  int cell_i(int c) const { return c % I_; }
  int cell_j(int c) const { return c / I_; }
  double x_left(int c) const { return cell_i(c) * h_; }
  double y_bottom(int c) const { return cell_j(c) * h_; }
  double x_center(int c) const { return (cell_i(c) + 0.5) * h_; }
  double y_center(int c) const { return (cell_j(c) + 0.5) * h_; }

  const std::vector<Interface>& interfaces() const { return interfaces_; }
  const Interface& interface(int id) const { return interfaces_[id]; }
  // Interface lying on the given face of a cell.
  int face_interface(int c, Face f) const { return cell_faces_[c][static_cast<int>(f)]; }

  int interior_count() const { return 2 * I_ * (I_ - 1); }
  int boundary_count() const { return 4 * I_; }
  // Position of a boundary interface in the boundary-only enumeration, -1 for interior.
  int boundary_index(int id) const { return boundary_index_[id]; }
  const std::vector<int>& boundary_interfaces() const { return boundary_ids_; }

  // Face midpoint of a cell.
  std::array<double, 2> face_midpoint(int c, Face f) const;

 private:
  int I_;
  double h_;
  std::vector<Interface> interfaces_;
  std::vector<std::array<int, 4>> cell_faces_;
  std::vector<int> boundary_index_;
  std::vector<int> boundary_ids_;
};

// Outward normal of a face.
std::array<double, 2> face_normal(Face f);
Face opposite(Face f);
bool is_vertical(Face f);

}  // namespace rte
