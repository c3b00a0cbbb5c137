#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wgmopo {

// Deterministic number formatting: C locale, '.' decimal, shortest
// round-trip representation.
std::string format_double(double v);

struct Provenance {
    std::string tool;
    std::string version;
    std::uint64_t config_hash = 0;
    std::string header_comment() const; // "# ..." line for CSV
};

// Writes content to a temporary file in the target directory and renames it
// into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

class CsvBuilder {
public:
    explicit CsvBuilder(const Provenance& prov, const std::string& header_line);
    void row(const std::vector<std::string>& cells);
    const std::string& str() const { return out_; }

private:
    std::string out_;
};

} // namespace wgmopo
