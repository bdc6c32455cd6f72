#include "ecdl/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include <zlib.h>

#include "ecdl/error.hpp"

namespace ecdl {

static_assert(std::endian::native == std::endian::little, "matrix files are written in host byte order");

namespace {

std::vector<unsigned char> row_major_bytes(const Matrix& values) {
    std::vector<unsigned char> bytes(static_cast<std::size_t>(values.size()) * sizeof(double));
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = values;
    std::memcpy(bytes.data(), row_major.data(), bytes.size());
    return bytes;
}

MatrixHeader parse_header(const std::string& line, const std::filesystem::path& path) {
    MatrixHeader header;
    try {
        const auto json = nlohmann::json::parse(line);
        if (json.at("dtype").get<std::string>() != "f64" || json.at("layout").get<std::string>() != "row-major") {
            throw Error(ErrorCode::FormatError, path.string() + ": unsupported dtype or layout");
        }
        header.rows = json.at("rows").get<Index>();
        header.cols = json.at("cols").get<Index>();
        header.checksum = json.at("checksum").get<std::uint32_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, path.string() + ": bad header: " + e.what());
    }
    if (header.rows < 0 || header.cols < 0) throw Error(ErrorCode::FormatError, path.string() + ": negative shape");
    return header;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return in;
}

}  // namespace

std::uint32_t crc32(std::span<const unsigned char> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
        crc = ::crc32(crc, bytes.data() + offset, chunk);
        offset += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

void write_matrix(const std::filesystem::path& path, const Matrix& values) {
    const auto bytes = row_major_bytes(values);
    nlohmann::json header = {{"rows", values.rows()},
                             {"cols", values.cols()},
                             {"dtype", "f64"},
                             {"layout", "row-major"},
                             {"checksum", crc32(bytes)}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

MatrixHeader read_matrix_header(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, path.string() + ": missing header");
    return parse_header(line, path);
}

Matrix read_matrix(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, path.string() + ": missing header");
    const MatrixHeader header = parse_header(line, path);

    std::vector<unsigned char> bytes(static_cast<std::size_t>(header.rows * header.cols) * sizeof(double));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw Error(ErrorCode::FormatError, path.string() + ": payload shorter than rows*cols*8 bytes");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw Error(ErrorCode::FormatError, path.string() + ": trailing bytes after payload");
    }
    if (crc32(bytes) != header.checksum) throw Error(ErrorCode::FormatError, path.string() + ": checksum mismatch");

    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(header.rows, header.cols);
    std::memcpy(row_major.data(), bytes.data(), bytes.size());
    return row_major;
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, path.string() + ": empty CSV");

    std::vector<double> values;
    Index cols = -1;
    Index rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream fields(line);
        std::string field;
        Index count = 0;
        while (std::getline(fields, field, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(field, &used));
                if (field.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw Error(ErrorCode::FormatError, path.string() + ": non-numeric field '" + field + "' on data row " +
                                                        std::to_string(rows + 1));
            }
            ++count;
        }
        if (cols < 0) cols = count;
        if (count != cols) {
            throw Error(ErrorCode::FormatError, path.string() + ": ragged row " + std::to_string(rows + 1));
        }
        ++rows;
    }
    if (rows == 0) throw Error(ErrorCode::FormatError, path.string() + ": no data rows");
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) out(i, j) = values[static_cast<std::size_t>(i * cols + j)];
    return out;
}

Matrix load_matrix(const std::filesystem::path& path) {
    if (path.extension() == ".csv") return read_csv_matrix(path);
    return read_matrix(path);
}

Vector load_vector(const std::filesystem::path& path) {
    Matrix m = load_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw Error(ErrorCode::FormatError, path.string() + ": expected a vector, got " + std::to_string(m.rows()) + "x" +
                                            std::to_string(m.cols()));
}

void write_vector(const std::filesystem::path& path, const Vector& values) { write_matrix(path, Matrix(values)); }

}  // namespace ecdl
