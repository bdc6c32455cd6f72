#pragma once

// Matrix exchange format: one JSON header line
//   {"checksum":<crc32 of payload>,"cols":C,"dtype":"f64","layout":"row-major","rows":R}\n
// followed by R*C little-endian IEEE-754 doubles in row-major order.

#include <cstdint>
#include <filesystem>
#include <span>

#include "ecdl/lasso.hpp"

namespace ecdl {

struct MatrixHeader {
    Index rows = 0;
    Index cols = 0;
    std::uint32_t checksum = 0;
};

std::uint32_t crc32(std::span<const unsigned char> bytes);

// IoError when the file cannot be opened or written.
void write_matrix(const std::filesystem::path& path, const Matrix& values);
// IoError on open/read failures, FormatError on a malformed header, short
// payload or checksum mismatch.
Matrix read_matrix(const std::filesystem::path& path);
MatrixHeader read_matrix_header(const std::filesystem::path& path);

// Comma-separated numbers with one header row that is skipped.
Matrix read_csv_matrix(const std::filesystem::path& path);

// Dispatches on extension: ".csv" -> CSV, anything else -> matrix format.
Matrix load_matrix(const std::filesystem::path& path);

// Column vector view helpers for length-n vectors stored as n x 1 matrices.
Vector load_vector(const std::filesystem::path& path);
void write_vector(const std::filesystem::path& path, const Vector& values);

}  // namespace ecdl
