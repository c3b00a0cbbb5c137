#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wgmopo {

// Minimal INI-style key=value file with [section] headers. Keys are stored
// as "section.key"; '#' and ';' start comments. Values keep '.' decimals
// regardless of locale.
class IniConfig {
public:
    static IniConfig from_file(const std::filesystem::path& path);
    static IniConfig from_string(const std::string& text, std::string origin = "<string>");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const; // comma separated

    void set(const std::string& key, const std::string& value);
    const std::map<std::string, std::string>& entries() const { return values_; }
    const std::string& origin() const { return origin_; }

    // Raw text as loaded; used for provenance hashing.
    const std::string& text() const { return text_; }

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
    std::string text_;
};

// FNV-1a over bytes; stable provenance hash for output headers.
std::uint64_t fnv1a_hash(const std::string& data);

} // namespace wgmopo
