#include "biphos/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <system_error>

#ifdef _WIN32
#error "atomic_write_file uses POSIX rename semantics"
#endif
#include <unistd.h>

namespace biphos {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : cols_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += header[i];
    }
    buf_ += '\n';
}

void CsvWriter::add_row(const std::vector<double>& values) {
    if (values.size() != cols_)
        throw std::invalid_argument("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += format_double(values[i]);
    }
    buf_ += '\n';
    ++rows_;
}

void CsvWriter::add_row_raw(const std::vector<std::string>& cells) {
    if (cells.size() != cols_)
        throw std::invalid_argument("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += cells[i];
    }
    buf_ += '\n';
    ++rows_;
}

void atomic_write_file(const std::string& path, const std::string& data) {
    const std::string tmp = path + ".tmp";
    FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f)
        throw std::system_error(errno, std::generic_category(),
                                "atomic_write_file: open " + tmp);
    const std::size_t n = std::fwrite(data.data(), 1, data.size(), f);
    const bool write_ok = (n == data.size());
    const bool flush_ok = (std::fflush(f) == 0) && (fsync(fileno(f)) == 0);
    std::fclose(f);
    if (!write_ok || !flush_ok) {
        std::remove(tmp.c_str());
        throw std::runtime_error("atomic_write_file: short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        const int err = errno;
        std::remove(tmp.c_str());
        throw std::system_error(err, std::generic_category(),
                                "atomic_write_file: rename to " + path);
    }
}

}  // namespace biphos
