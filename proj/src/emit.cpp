#include "wgmopo/emit.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wgmopo/errors.hpp"

namespace wgmopo {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char probe[64];
        std::snprintf(probe, sizeof probe, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    return buf;
}

std::string Provenance::header_comment() const {
    std::ostringstream ss;
    ss << "# " << tool << " " << version << " config_hash=" << std::hex << config_hash;
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write output file: " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

CsvBuilder::CsvBuilder(const Provenance& prov, const std::string& header_line) {
    out_ = prov.header_comment() + "\n" + header_line + "\n";
}

void CsvBuilder::row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ += ',';
        out_ += cells[i];
    }
    out_ += '\n';
}

} // namespace wgmopo
