#ifndef CHEMOSTAT_CSV_HPP
#define CHEMOSTAT_CSV_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace chemostat {

/// Shortest-exact decimal is deliberately avoided: every double is written
/// with 17 significant digits so files round-trip bit-exactly and reruns
/// are byte-identical.
std::string format_double(double v);

/// Minimal CSV writer: header row plus formatted rows, '\n' endings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& values);

    const std::string& text() const { return text_; }
    void write_file(const std::string& path) const;

private:
    std::string text_;
    std::size_t columns_;
};

/// FNV-1a 64-bit checksum, hex-encoded; used by the run manifests.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string fnv1a64_hex(const std::string& data);
std::string file_checksum(const std::string& path);

} // namespace chemostat

#endif
