#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "srbridge/errors.hpp"
#include "srbridge/geometry.hpp"

namespace srb {

// Flat `key = value` configuration file. '#' starts a comment, blank lines
// are skipped, duplicate keys are rejected.
class FlatConfig {
public:
    static FlatConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    static FlatConfig parse_string(const std::string& text, const std::string& origin = "<string>") {
        FlatConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigError(origin + ": duplicate key '" + key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) const {
        mark(key);
        const auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        mark(key);
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : (mark(key), fallback);
    }

    long get_int(const std::string& key) const { return to_int(key, get_string(key)); }
    long get_int(const std::string& key, long fallback) const {
        return has(key) ? get_int(key) : (mark(key), fallback);
    }

    std::uint64_t get_u64(const std::string& key) const {
        mark(key);
        const std::string s = get_string(key);
        try {
            std::size_t pos = 0;
            const std::uint64_t v = std::stoull(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected unsigned integer, got '" + s + "'");
        }
    }
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? get_u64(key) : (mark(key), fallback);
    }

    Point get_point(const std::string& key) const {
        const std::string s = get_string(key);
        std::vector<double> vals;
        std::istringstream in(s);
        std::string item;
        while (std::getline(in, item, ',')) vals.push_back(to_double(key, trim(item)));
        if (vals.empty()) throw ConfigError("config key '" + key + "': expected coordinates");
        Point p(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) p(static_cast<int>(i)) = vals[i];
        return p;
    }
    Point get_point(const std::string& key, const Point& fallback) const {
        return has(key) ? get_point(key) : (mark(key), fallback);
    }

    // After a command has read everything it understands, leftover keys are a
    // usage error naming the offender.
    void reject_unknown() const {
        for (const auto& [key, value] : values_)
            if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static double to_double(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected number, got '" + s + "'");
        }
    }

    static long to_int(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const long v = std::stol(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected integer, got '" + s + "'");
        }
    }

    void mark(const std::string& key) const { used_.insert(key); }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

}  // namespace srb
