#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "tienet/grid.hpp"

namespace tienet {

// PHF1 layout (all little-endian):
//   "PHF1" | u32 m | f64 a (nm) | u8 kind (0 real, 1 complex) | m*m samples
// Samples are f64, row-major; complex samples are interleaved (re, im).

std::vector<std::uint8_t> encode_phf1(const ScalarField& f);
std::vector<std::uint8_t> encode_phf1(const ComplexField& f);

using AnyField = std::variant<ScalarField, ComplexField>;

AnyField decode_phf1(const std::vector<std::uint8_t>& bytes);

void write_field(const std::filesystem::path& path, const ScalarField& f);
void write_field(const std::filesystem::path& path, const ComplexField& f);
AnyField read_field(const std::filesystem::path& path);

/// Reads a PHF1 file that must hold a real field.
ScalarField read_scalar_field(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tienet
