#pragma once

#include <string>
#include <vector>

namespace biphos {

/// Shortest decimal form that parses back to exactly the same double
/// (std::to_chars round-trip guarantee). NaN/inf render as "nan"/"inf".
std::string format_double(double v);

/// Minimal CSV assembler: header once, then rows of round-trip-formatted
/// doubles and/or strings. No quoting — field content is numeric or plain
/// labels throughout this project.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<double>& values);
    /// Mixed row: already-formatted cells (labels, ints, doubles).
    void add_row_raw(const std::vector<std::string>& cells);

    const std::string& str() const { return buf_; }
    std::size_t rows() const { return rows_; }

private:
    std::string buf_;
    std::size_t cols_;
    std::size_t rows_ = 0;
};

/// Write data to `path` atomically: write to a sibling temp file, fsync,
/// rename over the target. Readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& data);

}  // namespace biphos
