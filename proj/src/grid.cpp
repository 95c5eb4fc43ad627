#include "twnls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "twnls/errors.hpp"

namespace twnls {

Grid::Grid(int n, double R, int N) : n_(n), R_(R), N_(N) {
  if (n < 1) throw InvalidArgument("grid: n must be positive");
  if (!(R > 0) || !std::isfinite(R)) throw InvalidArgument("grid: R must be positive");
  if (N <= 0) throw InvalidArgument("grid: N must be positive");
  if (N % 2 != 0) throw InvalidArgument("grid: N must be even");
  if (N < 8) throw InvalidArgument("grid: N must be at least 8");
  if (R < 4) throw InvalidArgument("grid: R must be at least 4");
  h_ = 2.0 * R / N;
  weight_ = std::pow(h_, 2 * n);
  axis_.resize(N);
  for (int j = 0; j < N; ++j) axis_[j] = -R + (j + 0.5) * h_;
  const int d = 2 * n;
  strides_.assign(d, 1);
  for (int a = d - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * static_cast<std::size_t>(N);
  size_ = strides_[0] * static_cast<std::size_t>(N);
}

void Grid::coords(std::size_t node, std::span<double> out) const {
  for (int a = 0; a < dims(); ++a) out[a] = coord(node, a);
}

double Grid::abs2(std::size_t node) const {
  double s = 0;
  for (int a = 0; a < dims(); ++a) {
    const double c = coord(node, a);
    s += c * c;
  }
  return s;
}

GridPtr make_grid(int n, double R, int N) { return std::make_shared<const Grid>(n, R, N); }

GridFunction::GridFunction(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw InvalidArgument("grid function: null grid");
  v_.assign(grid_->size(), cplx(0.0));
}

GridFunction::GridFunction(GridPtr grid, std::vector<cplx> values)
    : grid_(std::move(grid)), v_(std::move(values)) {
  if (!grid_) throw InvalidArgument("grid function: null grid");
  if (v_.size() != grid_->size())
    throw InvalidArgument("grid function: value count does not match grid size");
}

bool GridFunction::all_finite() const { return first_nonfinite() < 0; }

std::ptrdiff_t GridFunction::first_nonfinite() const {
  for (std::size_t i = 0; i < v_.size(); ++i)
    if (!std::isfinite(v_[i].real()) || !std::isfinite(v_[i].imag()))
      return static_cast<std::ptrdiff_t>(i);
  return -1;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw GridMismatch("operands live on different grids");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same_grid(*grid_, *o.grid_);
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same_grid(*grid_, *o.grid_);
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(cplx a) {
  for (auto& x : v_) x *= a;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(cplx a, GridFunction f) { return f *= a; }

namespace {

constexpr std::size_t kBlock = 4096;

// Fixed-size blocks summed in order, so the result does not depend on the thread count.
template <class T, class F>
T blocked_sum(std::size_t n, F&& term) {
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<T> part(nb, T(0));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
    T s(0);
    const std::size_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    part[b] = s;
  }
  T total(0);
  for (const T& s : part) total += s;
  return total;
}

}  // namespace

cplx quadrature(const GridFunction& f) {
  const cplx* v = f.data();
  return blocked_sum<cplx>(f.size(), [v](std::size_t i) { return v[i]; }) * f.grid().weight();
}

cplx inner_product(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f.grid(), g.grid());
  const cplx* a = f.data();
  const cplx* b = g.data();
  return blocked_sum<cplx>(f.size(), [a, b](std::size_t i) { return a[i] * std::conj(b[i]); }) *
         f.grid().weight();
}

double lp_norm(std::span<const cplx> values, double weight, double p) {
  if (std::isnan(p) || p < 1) throw InvalidArgument("lp_norm: p must be >= 1");
  const cplx* v = values.data();
  if (std::isinf(p)) {
    double m = 0;
    for (const cplx& x : values) m = std::max(m, std::abs(x));
    return m;
  }
  if (p == 2.0)
    return std::sqrt(blocked_sum<double>(values.size(), [v](std::size_t i) { return std::norm(v[i]); }) *
                     weight);
  double s;
  if (p == 4.0) {
    s = blocked_sum<double>(values.size(), [v](std::size_t i) { const double a = std::norm(v[i]); return a * a; });
  } else if (p == 6.0) {
    s = blocked_sum<double>(values.size(), [v](std::size_t i) { const double a = std::norm(v[i]); return a * a * a; });
  } else if (p == 1.0) {
    s = blocked_sum<double>(values.size(), [v](std::size_t i) { return std::abs(v[i]); });
  } else {
    const double h = 0.5 * p;
    s = blocked_sum<double>(values.size(), [v, h](std::size_t i) { return std::pow(std::norm(v[i]), h); });
  }
  return std::pow(s * weight, 1.0 / p);
}

double lp_norm(const GridFunction& f, double p) {
  return lp_norm(std::span<const cplx>(f.values()), f.grid().weight(), p);
}

void write_grid_function(std::ostream& os, const GridFunction& f, DumpFormat format,
                         const std::vector<std::pair<std::string, std::string>>& meta) {
  const Grid& g = f.grid();
  os << "#format=" << (format == DumpFormat::csv ? "csv" : "binary") << '\n';
  for (const auto& [k, v] : meta) os << '#' << k << '=' << v << '\n';
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << g.n() << ',' << g.R() << ',' << g.N();
  os << hdr.str() << '\n';
  if (format == DumpFormat::csv) {
    char buf[64];
    for (const cplx& x : f.values()) {
      const int len = std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x.real(), x.imag());
      os.write(buf, len);
    }
  } else {
    os.write(reinterpret_cast<const char*>(f.data()),
             static_cast<std::streamsize>(f.size() * sizeof(cplx)));
  }
  if (!os) throw std::runtime_error("write_grid_function: stream error");
}

GridFunction read_grid_function(std::istream& is) {
  std::string line;
  bool binary = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') break;
    if (line == "#format=binary") binary = true;
  }
  int n = 0, N = 0;
  double R = 0;
  char c1 = 0, c2 = 0;
  std::istringstream hs(line);
  if (!(hs >> n >> c1 >> R >> c2 >> N) || c1 != ',' || c2 != ',')
    throw InvalidArgument("read_grid_function: malformed header line '" + line + "'");
  GridFunction f(make_grid(n, R, N));
  if (binary) {
    is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(cplx)));
    if (!is) throw InvalidArgument("read_grid_function: truncated binary payload");
    return f;
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::getline(is, line)) throw InvalidArgument("read_grid_function: truncated csv payload");
    char* end = nullptr;
    const double re = std::strtod(line.c_str(), &end);
    if (*end != ',') throw InvalidArgument("read_grid_function: malformed row " + std::to_string(i));
    const double im = std::strtod(end + 1, nullptr);
    f[i] = cplx(re, im);
  }
  return f;
}

void save_grid_function(const std::string& path, const GridFunction& f, DumpFormat format,
                        const std::vector<std::pair<std::string, std::string>>& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_grid_function(os, f, format, meta);
}

GridFunction load_grid_function(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  return read_grid_function(is);
}

}  // namespace twnls
