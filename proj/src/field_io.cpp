#include "tienet/field_io.hpp"

#include <fstream>
#include <iterator>
#include <span>

#include "tienet/binary.hpp"
#include "tienet/error.hpp"

namespace tienet {

namespace {

constexpr std::string_view kMagic = "PHF1";

void header(binary::Writer& w, std::size_t m, double a, std::uint8_t kind) {
  w.magic(kMagic);
  w.u32(static_cast<std::uint32_t>(m));
  w.f64(a);
  w.u8(kind);
}

}  // namespace

std::vector<std::uint8_t> encode_phf1(const ScalarField& f) {
  binary::Writer w;
  header(w, f.size(), f.width(), 0);
  w.f64s(f.values());
  return w.take();
}

std::vector<std::uint8_t> encode_phf1(const ComplexField& f) {
  binary::Writer w;
  header(w, f.size(), f.width(), 1);
  // std::complex<double> is layout-compatible with double[2].
  const auto* p = reinterpret_cast<const double*>(f.values().data());
  w.f64s(std::span<const double>(p, 2 * f.count()));
  return w.take();
}

AnyField decode_phf1(const std::vector<std::uint8_t>& bytes) {
  binary::Reader r(bytes);
  r.expect_magic(kMagic);
  const std::size_t m = r.u32();
  const double a = r.f64();
  const std::uint8_t kind = r.u8();
  check_grid_size(m);
  if (kind == 0) {
    std::vector<double> data(m * m);
    r.f64s(data);
    if (r.remaining() != 0) throw Error(ErrorCode::Format, "trailing bytes in PHF1 payload");
    return ScalarField(m, a, std::move(data));
  }
  if (kind == 1) {
    std::vector<Complex> data(m * m);
    r.f64s(std::span<double>(reinterpret_cast<double*>(data.data()), 2 * m * m));
    if (r.remaining() != 0) throw Error(ErrorCode::Format, "trailing bytes in PHF1 payload");
    return ComplexField(m, a, std::move(data));
  }
  throw Error(ErrorCode::Format, "unknown PHF1 field kind " + std::to_string(kind));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

void write_field(const std::filesystem::path& path, const ScalarField& f) {
  write_bytes(path, encode_phf1(f));
}

void write_field(const std::filesystem::path& path, const ComplexField& f) {
  write_bytes(path, encode_phf1(f));
}

AnyField read_field(const std::filesystem::path& path) { return decode_phf1(read_bytes(path)); }

ScalarField read_scalar_field(const std::filesystem::path& path) {
  auto any = read_field(path);
  if (auto* f = std::get_if<ScalarField>(&any)) return std::move(*f);
  throw Error(ErrorCode::Format, path.string() + " holds a complex field, expected real");
}

}  // namespace tienet
