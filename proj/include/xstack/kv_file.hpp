// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Plain-text `key = value` files with an optional "<format> v<N>" header line.
// Blank lines and lines starting with '#' are ignored; keys may repeat.
#ifndef XSTACK_KV_FILE_HPP
#define XSTACK_KV_FILE_HPP

#include "xstack/trace_model.hpp"

#include <charconv>
#include <fstream>
#include <istream>

namespace xstack::kv {

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
};

struct File {
    std::string format;  // empty when the file has no header line
    int version = 0;
    std::vector<Entry> entries;

    const Entry* find(std::string_view key) const
    {
        for (const auto& e : entries) {
            if (e.key == key) return &e;
        }
        return nullptr;
    }
};

inline std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline File parse(std::istream& in, const std::string& what)
{
    File out;
    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            if (!first) throw Error(ErrorKind::Config, what + ":" + std::to_string(lineno) + ": expected key = value");
            auto sp = t.find(" v");
            if (sp == std::string::npos) {
                throw Error(ErrorKind::Config, what + ":" + std::to_string(lineno) + ": bad header '" + t + "'");
            }
            out.format = t.substr(0, sp);
            auto ver = t.substr(sp + 2);
            auto [p, ec] = std::from_chars(ver.data(), ver.data() + ver.size(), out.version);
            if (ec != std::errc{} || p != ver.data() + ver.size()) {
                throw Error(ErrorKind::Config, what + ": bad header version '" + ver + "'");
            }
            first = false;
            continue;
        }
        first = false;
        auto key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw Error(ErrorKind::Config, what + ":" + std::to_string(lineno) + ": empty key");
        out.entries.push_back({key, trim(std::string_view(t).substr(eq + 1)), lineno});
    }
    return out;
}

inline File parse_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::Io, "cannot open " + path);
    return parse(f, path);
}

inline File expect_format(File f, std::string_view format, int version, const std::string& what)
{
    if (f.format != format || f.version != version) {
        throw Error(ErrorKind::Config, what + ": expected header '" + std::string(format) + " v" +
                                           std::to_string(version) + "'");
    }
    return f;
}

template <typename Int>
Int parse_int(std::string_view s, const std::string& what)
{
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw Error(ErrorKind::Config, what + ": expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

inline double parse_double(std::string_view s, const std::string& what)
{
    try {
        std::size_t used = 0;
        std::string str(s);
        double v = std::stod(str, &used);
        if (used != str.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Config, what + ": expected a number, got '" + std::string(s) + "'");
    }
}

inline std::vector<std::string> split_ws(std::string_view s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace xstack::kv

#endif  // XSTACK_KV_FILE_HPP
