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

#ifndef TRILINK_KV_TEXT_H_
#define TRILINK_KV_TEXT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trilink {

/// Shortest round-trip-safe rendering with 17 significant digits.
std::string format_double(double x);

double parse_double(std::string_view text, std::string_view what = "value");
std::int64_t parse_int(std::string_view text, std::string_view what = "value");
std::uint64_t parse_uint(std::string_view text, std::string_view what = "value");

/// Ordered `key = value` document. Lines starting with '#' are comments.
/// Used for metadata sidecars, estimate reports and fit results.
class KeyValueText {
   public:
    void set(std::string key, std::string value);
    void set(std::string key, double value) { set(std::move(key), format_double(value)); }
    void set(std::string key, std::int64_t value) { set(std::move(key), std::to_string(value)); }
    void set(std::string key, std::uint64_t value) { set(std::move(key), std::to_string(value)); }
    void set(std::string key, int value) { set(std::move(key), std::to_string(value)); }
    void set(std::string key, bool value) { set(std::move(key), std::string(value ? "true" : "false")); }
    void set(std::string key, const char *value) { set(std::move(key), std::string(value)); }

    bool has(std::string_view key) const;
    std::optional<std::string> find(std::string_view key) const;
    /// Throws kConfig when the key is missing.
    const std::string &get(std::string_view key) const;
    double get_double(std::string_view key) const;
    std::int64_t get_int(std::string_view key) const;
    std::uint64_t get_uint(std::string_view key) const;
    bool get_bool(std::string_view key) const;

    const std::vector<std::pair<std::string, std::string>> &entries() const { return entries_; }

    void write(std::ostream &out) const;
    std::string to_string() const;
    static KeyValueText parse(std::istream &in);
    static KeyValueText parse(std::string_view text);
    static KeyValueText read_file(const std::string &path);
    void write_file(const std::string &path) const;

   private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace trilink

#endif  // TRILINK_KV_TEXT_H_
