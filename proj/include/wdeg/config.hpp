#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wdeg/errors.hpp"

namespace wdeg {

/// Key-value configuration with [section] headers, '#' comments, and
/// "key = value" lines. Keys are unique within a section; values are typed
/// on access. Subcommands declare the keys they understand and anything
/// else is rejected, so typos fail loudly.
class Config {
public:
    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file: " + path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        return parse_string(buffer.str(), path);
    }

    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line;
        std::string section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string trimmed = trim(strip_comment(line));
            if (trimmed.empty()) continue;
            if (trimmed.front() == '[') {
                if (trimmed.back() != ']')
                    throw config_error(origin + ":" + std::to_string(lineno) +
                                       ": malformed section header");
                section = trim(trimmed.substr(1, trimmed.size() - 2));
                if (section.empty())
                    throw config_error(origin + ":" + std::to_string(lineno) +
                                       ": empty section name");
                cfg.sections_[section];  // sections may be empty
                continue;
            }
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw config_error(origin + ":" + std::to_string(lineno) +
                                   ": expected 'key = value'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw config_error(origin + ":" + std::to_string(lineno) + ": empty key");
            auto& sec = cfg.sections_[section];
            if (sec.count(key))
                throw config_error(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                   key + "'");
            sec[key] = value;
        }
        return cfg;
    }

    bool has_section(const std::string& name) const { return sections_.count(name) > 0; }

    bool has(const std::string& section, const std::string& key) const {
        const auto it = sections_.find(section);
        return it != sections_.end() && it->second.count(key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key) const {
        const auto it = sections_.find(section);
        if (it == sections_.end() || !it->second.count(key))
            throw config_error(origin_ + ": missing key '" + key + "' in section [" + section +
                               "]");
        return it->second.at(key);
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        return has(section, key) ? get_string(section, key) : fallback;
    }

    double get_number(const std::string& section, const std::string& key) const {
        return to_number(section, key, get_string(section, key));
    }

    double get_number(const std::string& section, const std::string& key,
                      double fallback) const {
        return has(section, key) ? get_number(section, key) : fallback;
    }

    long long get_integer(const std::string& section, const std::string& key,
                          long long fallback) const {
        if (!has(section, key)) return fallback;
        const double v = get_number(section, key);
        const auto r = static_cast<long long>(v);
        if (static_cast<double>(r) != v)
            throw config_error(origin_ + ": key '" + key + "' must be an integer");
        return r;
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_string(section, key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw config_error(origin_ + ": key '" + key + "' must be a boolean");
    }

    std::vector<double> get_numbers(const std::string& section, const std::string& key,
                                    std::vector<double> fallback = {}) const {
        if (!has(section, key)) return fallback;
        std::vector<double> out;
        std::string item;
        std::istringstream in(get_string(section, key));
        while (std::getline(in, item, ',')) out.push_back(to_number(section, key, trim(item)));
        return out;
    }

    /// Rejects unknown sections/keys. `allowed` maps section name ->
    /// permitted keys; a missing section entry rejects the whole section.
    void restrict(const std::map<std::string, std::set<std::string>>& allowed) const {
        for (const auto& [section, keys] : sections_) {
            const auto it = allowed.find(section);
            if (it == allowed.end())
                throw config_error(origin_ + ": unknown section [" + section + "]");
            for (const auto& [key, value] : keys) {
                (void)value;
                if (!it->second.count(key))
                    throw config_error(origin_ + ": unknown key '" + key + "' in section [" +
                                       section + "]");
            }
        }
    }

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    static std::string strip_comment(const std::string& s) {
        const auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }

    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    double to_number(const std::string& section, const std::string& key,
                     const std::string& value) const {
        std::size_t consumed = 0;
        double out = 0.0;
        try {
            out = std::stod(value, &consumed);
        } catch (const std::exception&) {
            throw config_error(origin_ + ": key '" + key + "' in [" + section +
                               "] is not a number: '" + value + "'");
        }
        if (consumed != value.size())
            throw config_error(origin_ + ": key '" + key + "' in [" + section +
                               "] has trailing junk: '" + value + "'");
        return out;
    }

    std::string origin_;
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace wdeg
