#include "pqlip/field_io.hpp"

#include "pqlip/errors.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace pqlip {

namespace {

constexpr char kMagic[4] = {'D', 'G', 'V', 'F'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary field format assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error("truncated binary field header");
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw Error("malformed number in field CSV: " + s);
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

} // namespace

void write_field_csv(std::ostream& os, const DiscreteField& u) {
  if (!u.is_full()) throw PreconditionError("only full-grid fields are serialized");
  const int dim = u.grid().dim();
  os << "x";
  if (dim == 2) os << ",y";
  for (std::size_t k = 0; k < u.components(); ++k) os << ",u" << k;
  os << "\n";
  u.for_each([&](std::size_t i, std::size_t j, std::size_t l) {
    os << format_double(u.grid().node_coord(i));
    if (dim == 2) os << "," << format_double(u.grid().node_coord(j));
    for (std::size_t k = 0; k < u.components(); ++k) os << "," << format_double(u.values()[k * u.points() + l]);
    os << "\n";
  });
}

DiscreteField read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("empty field CSV");
  const auto header = split(line);
  const int dim = header.size() >= 2 && header[1] == "y" ? 2 : 1;
  if (header.empty() || header[0] != "x" || header.size() <= static_cast<std::size_t>(dim))
    throw Error("field CSV header must start with x[,y] and list at least one component");
  const std::size_t N = header.size() - dim;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw Error("field CSV row has the wrong number of columns");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c));
    rows.push_back(std::move(row));
  }
  std::size_t n = rows.size();
  if (dim == 2) {
    std::size_t side = 0;
    while (side * side < n) ++side;
    if (side * side != n) throw Error("2D field CSV does not hold a square node set");
    n = side;
  }
  if (n < 2) throw Error("field CSV needs at least two nodes per axis");
  DiscreteField u(Grid(dim, n), N);
  std::size_t r = 0;
  u.for_each([&](std::size_t, std::size_t, std::size_t l) {
    for (std::size_t k = 0; k < N; ++k) u.values()[k * u.points() + l] = rows[r][dim + k];
    ++r;
  });
  return u;
}

void write_field_binary(std::ostream& os, const DiscreteField& u) {
  if (!u.is_full()) throw PreconditionError("only full-grid fields are serialized");
  const int dim = u.grid().dim();
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(dim));
  for (int a = 0; a < dim; ++a) put_u32(os, static_cast<std::uint32_t>(u.grid().n_nodes()));
  put_u32(os, static_cast<std::uint32_t>(u.components()));
  std::vector<double> buf(u.points() * u.components());
  u.for_each([&](std::size_t, std::size_t, std::size_t l) {
    for (std::size_t k = 0; k < u.components(); ++k) buf[l * u.components() + k] = u.values()[k * u.points() + l];
  });
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
}

DiscreteField read_field_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw Error("not a binary field (bad magic)");
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw Error("unsupported binary field version " + std::to_string(version));
  const std::uint32_t dim = get_u32(is);
  if (dim != 1 && dim != 2) throw Error("binary field dimension must be 1 or 2");
  std::uint32_t n = get_u32(is);
  if (dim == 2 && get_u32(is) != n) throw Error("binary field grids must have equal extents");
  const std::uint32_t N = get_u32(is);
  if (n < 2 || N == 0) throw Error("binary field header describes an empty field");
  DiscreteField u(Grid(static_cast<int>(dim), n), N);
  std::vector<double> buf(u.points() * N);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double))))
    throw Error("truncated binary field payload");
  u.for_each([&](std::size_t, std::size_t, std::size_t l) {
    for (std::size_t k = 0; k < N; ++k) u.values()[k * u.points() + l] = buf[l * N + k];
  });
  return u;
}

void save_field(const std::string& path, const DiscreteField& u) {
  const bool binary = path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw Error("cannot open " + path + " for writing");
  if (binary)
    write_field_binary(os, u);
  else
    write_field_csv(os, u);
  if (!os) throw Error("write failed for " + path);
}

DiscreteField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  char magic[4] = {};
  is.read(magic, 4);
  is.clear();
  is.seekg(0);
  if (std::memcmp(magic, kMagic, 4) == 0) return read_field_binary(is);
  return read_field_csv(is);
}

} // namespace pqlip
