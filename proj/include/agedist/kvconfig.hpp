// Ordered key/value record used to embed each run's resolved configuration
// into its output files and to read `key = value` config files.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace agedist {

class KvConfig {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);    // shortest exact form
    void set(const std::string& key, int value);
    void set(const std::string& key, std::uint64_t value);

    std::optional<std::string> get(const std::string& key) const;
    bool contains(const std::string& key) const { return get(key).has_value(); }

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

    // One `# key = value` line per entry, in insertion order.
    void write_header(std::ostream& out) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Parses a config file with one `key = value` pair per line; blank lines and
// '#' comments are ignored. Throws std::runtime_error naming the line on a
// malformed entry.
KvConfig parse_config_file(const std::string& path);

// Shortest decimal form that round-trips the double exactly.
std::string format_double(double value);

}  // namespace agedist
