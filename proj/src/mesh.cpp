#include "rte/mesh.hpp"

#include "rte/error.hpp"

namespace rte {

std::array<double, 2> face_normal(Face f) {
  switch (f) {
    case Face::Left:
      return {-1.0, 0.0};
    case Face::Right:
      return {1.0, 0.0};
    case Face::Bottom:
      return {0.0, -1.0};
    case Face::Top:
      return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

Face opposite(Face f) {
  switch (f) {
    case Face::Left:
      return Face::Right;
    case Face::Right:
      return Face::Left;
    case Face::Bottom:
      return Face::Top;
    case Face::Top:
      return Face::Bottom;
  }
  return f;
}

bool is_vertical(Face f) { return f == Face::Left || f == Face::Right; }

Mesh::Mesh(int I) : I_(I), h_(1.0 / I) {
  if (I < 1) throw ConfigError("mesh: grid size must be positive");
  cell_faces_.assign(std::size_t(I) * I, {-1, -1, -1, -1});
  auto set_face = [&](int c, Face f, int id) { cell_faces_[c][static_cast<int>(f)] = id; };

  for (int j = 0; j < I; ++j) {
    for (int i = 0; i <= I; ++i) {
      Interface itf;
      itf.vertical = true;
      itf.mid_x = i * h_;
      itf.mid_y = (j + 0.5) * h_;
      const int id = static_cast<int>(interfaces_.size());
      if (i == 0) {
        itf.boundary = true;
        itf.minus = cell(0, j);
        itf.face = Face::Left;
        set_face(itf.minus, Face::Left, id);
      } else if (i == I) {
        itf.boundary = true;
        itf.minus = cell(I - 1, j);
        itf.face = Face::Right;
        set_face(itf.minus, Face::Right, id);
      } else {
        itf.minus = cell(i - 1, j);
        itf.plus = cell(i, j);
        itf.face = Face::Right;
        set_face(itf.minus, Face::Right, id);
        set_face(itf.plus, Face::Left, id);
      }
      interfaces_.push_back(itf);
    }
  }
  for (int j = 0; j <= I; ++j) {
    for (int i = 0; i < I; ++i) {
      Interface itf;
      itf.vertical = false;
      itf.mid_x = (i + 0.5) * h_;
      itf.mid_y = j * h_;
      const int id = static_cast<int>(interfaces_.size());
      if (j == 0) {
        itf.boundary = true;
        itf.minus = cell(i, 0);
        itf.face = Face::Bottom;
        set_face(itf.minus, Face::Bottom, id);
      } else if (j == I) {
        itf.boundary = true;
        itf.minus = cell(i, I - 1);
        itf.face = Face::Top;
        set_face(itf.minus, Face::Top, id);
      } else {
        itf.minus = cell(i, j - 1);
        itf.plus = cell(i, j);
        itf.face = Face::Top;
        set_face(itf.minus, Face::Top, id);
        set_face(itf.plus, Face::Bottom, id);
      }
      interfaces_.push_back(itf);
    }
  }

  boundary_index_.assign(interfaces_.size(), -1);
  for (std::size_t id = 0; id < interfaces_.size(); ++id) {
    if (interfaces_[id].boundary) {
      boundary_index_[id] = static_cast<int>(boundary_ids_.size());
      boundary_ids_.push_back(static_cast<int>(id));
    }
  }
}

std::array<double, 2> Mesh::face_midpoint(int c, Face f) const {
  const double x0 = x_left(c), y0 = y_bottom(c);
  switch (f) {
    case Face::Left:
      return {x0, y0 + 0.5 * h_};
    case Face::Right:
      return {x0 + h_, y0 + 0.5 * h_};
    case Face::Bottom:
      return {x0 + 0.5 * h_, y0};
    case Face::Top:
      return {x0 + 0.5 * h_, y0 + h_};
  }
  return {x0, y0};
}

}  // namespace rte
