#pragma once

#include <string>
#include <vector>

namespace dlab {

// Scalar field on a uniform periodic grid. Row-major, last index fastest.
struct GridFunction {
  std::vector<int> dims;
  std::vector<double> spacing;
  std::vector<double> origin;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(std::vector<int> dims, std::vector<double> spacing, double fill = 0.0);

  size_t size() const { return values.size(); }
  int rank() const { return int(dims.size()); }
  double coord(int axis, int i) const { return origin[axis] + i * spacing[axis]; }

  // periodic indexing
  double& at(int i) { return values[wrap(0, i)]; }
  double at(int i) const { return values[wrap(0, i)]; }
  double& at(int i, int j) { return values[size_t(wrap(0, i)) * dims[1] + wrap(1, j)]; }
  double at(int i, int j) const { return values[size_t(wrap(0, i)) * dims[1] + wrap(1, j)]; }

  double min() const;
  double max() const;
  bool same_shape(const GridFunction& o) const;

  // flat little-endian doubles, with a text header next to it (path + ".hdr")
  void save(const std::string& path) const;
  static GridFunction load(const std::string& path);
  void write_csv(const std::string& path, const std::string& value_name) const;

 private:
  int wrap(int axis, int i) const {
    int n = dims[axis];
    i %= n;
    return i < 0 ? i + n : i;
  }
};

}  // namespace dlab
