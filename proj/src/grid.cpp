#include "dlab/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dlab/common.hpp"

namespace dlab {

GridFunction::GridFunction(std::vector<int> d, std::vector<double> h, double fill)
    : dims(std::move(d)), spacing(std::move(h)), origin(dims.size(), 0.0) {
  size_t n = std::accumulate(dims.begin(), dims.end(), size_t(1),
                             [](size_t a, int b) { return a * size_t(b); });
  values.assign(n, fill);
}

double GridFunction::min() const { return *std::min_element(values.begin(), values.end()); }
double GridFunction::max() const { return *std::max_element(values.begin(), values.end()); }

bool GridFunction::same_shape(const GridFunction& o) const {
  return dims == o.dims && spacing == o.spacing;
}

void GridFunction::save(const std::string& path) const {
  std::ofstream hdr(path + ".hdr");
  hdr << "rank " << dims.size() << "\n";
  hdr << "dims";
  for (int d : dims) hdr << ' ' << d;
  hdr << "\nspacing";
  for (double h : spacing) hdr << ' ' << std::hexfloat << h;
  hdr << "\norigin";
  for (double o : origin) hdr << ' ' << std::hexfloat << o;
  hdr << "\n";
  std::ofstream bin(path, std::ios::binary);
  bin.write(reinterpret_cast<const char*>(values.data()), std::streamsize(values.size() * sizeof(double)));
  if (!bin) throw Error(Module::config, "cannot write " + path);
}

GridFunction GridFunction::load(const std::string& path) {
  std::ifstream hdr(path + ".hdr");
  if (!hdr) throw Error(Module::config, "missing header " + path + ".hdr");
  std::string key;
  size_t rank = 0;
  hdr >> key >> rank;
  std::vector<int> dims(rank);
  std::vector<double> spacing(rank), origin(rank);
  hdr >> key;
  for (auto& d : dims) hdr >> d;
  auto read_hex = [&](std::vector<double>& v) {
    hdr >> key;
    for (auto& x : v) {
      std::string tok;
      hdr >> tok;
      x = std::strtod(tok.c_str(), nullptr);
    }
  };
  read_hex(spacing);
  read_hex(origin);
  GridFunction g(dims, spacing);
  g.origin = origin;
  std::ifstream bin(path, std::ios::binary);
  bin.read(reinterpret_cast<char*>(g.values.data()), std::streamsize(g.values.size() * sizeof(double)));
  if (!bin) throw Error(Module::config, "short read " + path);
  return g;
}

void GridFunction::write_csv(const std::string& path, const std::string& value_name) const {
  std::ofstream os(path);
  if (!os) throw Error(Module::config, "cannot write " + path);
  char buf[96];
  if (rank() == 1) {
    os << "x," << value_name << "\n";
    for (int i = 0; i < dims[0]; ++i) {
      std::snprintf(buf, sizeof buf, "%.10g,%.12g\n", coord(0, i), at(i));
      os << buf;
    }
  } else {
    os << "x1,x2," << value_name << "\n";
    for (int i = 0; i < dims[0]; ++i)
      for (int j = 0; j < dims[1]; ++j) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g\n", coord(0, i), coord(1, j), at(i, j));
        os << buf;
      }
  }
}

}  // namespace dlab
