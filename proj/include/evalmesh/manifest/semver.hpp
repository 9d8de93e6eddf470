/*
 * Copyright 2026 The evalmesh Authors.
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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace evalmesh::manifest {

struct SemVer {
  std::uint64_t major = 0;
  std::uint64_t minor = 0;
  std::uint64_t patch = 0;
  std::string prerelease;  // empty when absent

  // Accepts "1", "1.2", "1.2.3" and an optional "-label" suffix. Build
  // metadata ("+...") is dropped. Throws Error(kSchemaError) otherwise.
  static SemVer parse(std::string_view text);
  static std::optional<SemVer> try_parse(std::string_view text);

  std::string to_string() const;
  bool has_prerelease() const { return !prerelease.empty(); }
  bool same_triple(const SemVer& other) const {
    return major == other.major && minor == other.minor &&
           patch == other.patch;
  }

  friend bool operator==(const SemVer&, const SemVer&) = default;
  friend std::strong_ordering operator<=>(const SemVer& a, const SemVer& b);
};

// A version requirement. Every kind is normalized to an interval with
// optional, independently inclusive bounds, so one `matches` serves all.
class VersionConstraint {
 public:
  enum class Kind { kExact, kCaret, kRange, kWildcard };

  struct Bound {
    SemVer version;
    bool inclusive = true;
    friend bool operator==(const Bound&, const Bound&) = default;
  };

  // Grammar (whitespace-insensitive):
  //   exact     1.13.0 | =1.13.0
  //   caret     ^1.x | ^1 | ^1.2.3
  //   wildcard  * | x | 1.x | 1.12.x
  //   range     >=1.10.x <=1.13.0 | >=1.10 , <1.14 | ≥1.10.x ∧ ≤1.13.0 |
  //             >=1.10 and <=1.13 | 1.10.0 - 1.13.0
  static VersionConstraint parse(std::string_view text);

  static VersionConstraint exact(const SemVer& v);
  static VersionConstraint caret(std::uint64_t major);
  static VersionConstraint range(std::optional<Bound> lower,
                                 std::optional<Bound> upper);

  bool matches(const SemVer& v) const;

  Kind kind() const { return kind_; }
  const std::optional<Bound>& lower() const { return lower_; }
  const std::optional<Bound>& upper() const { return upper_; }
  const std::string& raw() const { return raw_; }

  friend bool operator==(const VersionConstraint& a,
                         const VersionConstraint& b) {
    return a.kind_ == b.kind_ && a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

 private:
  Kind kind_ = Kind::kWildcard;
  std::optional<Bound> lower_;
  std::optional<Bound> upper_;
  std::string raw_ = "*";
};

std::string_view to_string(VersionConstraint::Kind kind);

}  // namespace evalmesh::manifest
