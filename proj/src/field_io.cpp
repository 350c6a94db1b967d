#include "hymh/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hymh {

namespace {

static_assert(std::endian::native == std::endian::little, "field files are written on little-endian hosts only");

constexpr char kMagic[4] = {'H', 'Y', 'M', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kComplex128 = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("read_field: truncated file " + path);
  return v;
}

}  // namespace

void write_field(const std::string& path, const MatrixField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_field: cannot open " + path);
  const GridSpec& grid = field.grid();
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.n()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.N()));
  for (double L : grid.periods()) put<double>(out, L);
  put<std::uint32_t>(out, kComplex128);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.rank()));
  const int r = field.rank();
  for (std::size_t p = 0; p < field.points(); ++p)
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        const Complex z = field.at(p)(a, b);
        put<double>(out, z.real());
        put<double>(out, z.imag());
      }
  if (!out) throw std::runtime_error("write_field: write failed for " + path);
}

void write_field(const std::string& path, const ScalarField& field) {
  MatrixField m(field.grid(), 1);
  m.set_component(0, 0, field);
  write_field(path, m);
}

MatrixField read_matrix_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_field: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("read_field: bad magic in " + path);
  if (get<std::uint32_t>(in, path) != kVersion) throw std::runtime_error("read_field: unsupported version in " + path);
  const int n = static_cast<int>(get<std::uint32_t>(in, path));
  const int N = static_cast<int>(get<std::uint32_t>(in, path));
  if (n < 1 || n > 2) throw std::runtime_error("read_field: bad dimension in " + path);
  std::vector<double> periods(2 * n);
  for (double& L : periods) L = get<double>(in, path);
  if (get<std::uint32_t>(in, path) != kComplex128) throw std::runtime_error("read_field: unsupported dtype in " + path);
  const int r = static_cast<int>(get<std::uint32_t>(in, path));
  if (r < 1 || r > 64) throw std::runtime_error("read_field: bad rank in " + path);
  MatrixField field(GridSpec(n, N, periods), r);
  for (std::size_t p = 0; p < field.points(); ++p)
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        const double re = get<double>(in, path);
        const double im = get<double>(in, path);
        field.at(p)(a, b) = Complex(re, im);
      }
  return field;
}

ScalarField read_scalar_field(const std::string& path) {
  const MatrixField m = read_matrix_field(path);
  if (m.rank() != 1) throw std::runtime_error("read_field: expected a scalar field in " + path);
  return m.component(0, 0);
}

}  // namespace hymh
