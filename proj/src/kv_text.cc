// Copyright 2026 The trilink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trilink/kv_text.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "trilink/errors.h"

namespace trilink {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

Error bad_number(std::string_view text, std::string_view what) {
    return Error(ErrorCode::kConfig, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    text = trim(text);
    if (text == "nan") return std::nan("");
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
        throw bad_number(text, what);
    }
    return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
    text = trim(text);
    std::int64_t value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
        throw bad_number(text, what);
    }
    return value;
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
    text = trim(text);
    std::uint64_t value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
        throw bad_number(text, what);
    }
    return value;
}

void KeyValueText::set(std::string key, std::string value) {
    for (auto &[k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(key), std::move(value));
}

bool KeyValueText::has(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> KeyValueText::find(std::string_view key) const {
    for (const auto &[k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

const std::string &KeyValueText::get(std::string_view key) const {
    for (const auto &[k, v] : entries_) {
        if (k == key) return v;
    }
    throw Error(ErrorCode::kConfig, "missing key '" + std::string(key) + "'");
}

double KeyValueText::get_double(std::string_view key) const { return parse_double(get(key), key); }
std::int64_t KeyValueText::get_int(std::string_view key) const { return parse_int(get(key), key); }
std::uint64_t KeyValueText::get_uint(std::string_view key) const { return parse_uint(get(key), key); }

bool KeyValueText::get_bool(std::string_view key) const {
    const std::string &v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw Error(ErrorCode::kConfig, "key '" + std::string(key) + "' is not a boolean: '" + v + "'");
}

void KeyValueText::write(std::ostream &out) const {
    for (const auto &[k, v] : entries_) out << k << " = " << v << '\n';
}

std::string KeyValueText::to_string() const {
    std::ostringstream out;
    write(out);
    return out.str();
}

KeyValueText KeyValueText::parse(std::istream &in) {
    KeyValueText doc;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        std::string_view key = trim(view.substr(0, eq));
        std::string_view value = trim(view.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (key.empty()) {
            throw Error(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": empty key");
        }
        doc.set(std::string(key), std::string(value));
    }
    return doc;
}

KeyValueText KeyValueText::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
}

KeyValueText KeyValueText::read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
    return parse(in);
}

void KeyValueText::write_file(const std::string &path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
    write(out);
}

}  // namespace trilink
