#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "ridepool/types.hpp"

namespace ridepool {

// key = value file with optional [section] headers; keys are addressed as
// "section.key". Flags override file values override built-in defaults.
class ConfigFile {
public:
    ConfigFile() = default;
    static ConfigFile load(const std::string& path);
    static ConfigFile parse(std::istream& in, const std::string& source_name);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key, double fallback) const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace ridepool
