/*
 * Copyright 2026 The dtedesign Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

// Reader for the TOML subset used by the config files: [table] headers
// (dotted for nesting), key = value pairs with string/bool/number/array
// values, and # comments. Everything lands in a nlohmann::json tree, so TOML
// and JSON configs are interchangeable.

namespace dte::io {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Strip a trailing comment that is not inside a quoted string.
inline std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

inline nlohmann::json parse_toml_value(const std::string& raw, int line);

inline nlohmann::json parse_toml_array(const std::string& raw, int line) {
    nlohmann::json arr = nlohmann::json::array();
    std::string body = trim(raw.substr(1, raw.size() - 2));
    if (body.empty()) return arr;
    std::string token;
    int depth = 0;
    bool in_string = false;
    auto flush = [&] {
        std::string t = trim(token);
        if (t.empty()) {
            throw ConfigError("toml: empty array element at line " +
                              std::to_string(line));
        }
        arr.push_back(parse_toml_value(t, line));
        token.clear();
    };
    for (char c : body) {
        if (c == '"') in_string = !in_string;
        if (!in_string) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
            if (c == ',' && depth == 0) {
                flush();
                continue;
            }
        }
        token += c;
    }
    flush();
    return arr;
}

inline nlohmann::json parse_toml_value(const std::string& raw, int line) {
    std::string v = trim(raw);
    if (v.empty()) {
        throw ConfigError("toml: missing value at line " +
                          std::to_string(line));
    }
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') {
            throw ConfigError("toml: unterminated string at line " +
                              std::to_string(line));
        }
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                ++i;
                switch (v[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default:
                        throw ConfigError("toml: unsupported escape at line " +
                                          std::to_string(line));
                }
            } else {
                out += v[i];
            }
        }
        return out;
    }
    if (v.front() == '[') {
        if (v.back() != ']') {
            throw ConfigError("toml: unterminated array at line " +
                              std::to_string(line));
        }
        return parse_toml_array(v, line);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        std::size_t pos = 0;
        if (v.find_first_of(".eE") == std::string::npos) {
            long long i = std::stoll(v, &pos);
            if (pos == v.size()) return i;
        } else {
            double d = std::stod(v, &pos);
            if (pos == v.size()) return d;
        }
    } catch (const std::exception&) {
        // fall through to the error below
    }
    throw ConfigError("toml: cannot parse value '" + v + "' at line " +
                      std::to_string(line));
}

}  // namespace detail

inline nlohmann::json parse_toml(std::istream& in) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* current = &root;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = detail::trim(detail::strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') {
                throw ConfigError("toml: bad table header at line " +
                                  std::to_string(lineno));
            }
            std::string path = detail::trim(s.substr(1, s.size() - 2));
            if (path.empty()) {
                throw ConfigError("toml: empty table name at line " +
                                  std::to_string(lineno));
            }
            current = &root;
            std::stringstream ss(path);
            std::string part;
            while (std::getline(ss, part, '.')) {
                part = detail::trim(part);
                current = &(*current)[part];
                if (!current->is_object() && !current->is_null()) {
                    throw ConfigError("toml: table redefines key '" + part +
                                      "' at line " + std::to_string(lineno));
                }
            }
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("toml: expected key = value at line " +
                              std::to_string(lineno));
        }
        std::string key = detail::trim(s.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("toml: empty key at line " +
                              std::to_string(lineno));
        }
        if (current->contains(key)) {
            throw ConfigError("toml: duplicate key '" + key + "' at line " +
                              std::to_string(lineno));
        }
        (*current)[key] = detail::parse_toml_value(s.substr(eq + 1), lineno);
    }
    return root;
}

/// Load a config file, dispatching on extension: .toml via the subset parser
/// above, anything else as JSON.
inline nlohmann::json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml") {
        return parse_toml(in);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("json parse error in " + path + ": " + e.what());
    }
}

}  // namespace dte::io
