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

#include "evalmesh/manifest/semver.hpp"

#include <charconv>
#include <vector>

#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"

namespace evalmesh::manifest {

namespace {

bool parse_uint(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_wild(std::string_view s) { return s == "x" || s == "X" || s == "*"; }

// Prerelease precedence: dot-separated identifiers, numeric ones compared
// numerically and ranked below alphanumeric ones.
std::strong_ordering compare_prerelease(const std::string& a,
                                        const std::string& b) {
  if (a == b) return std::strong_ordering::equal;
  if (a.empty()) return std::strong_ordering::greater;
  if (b.empty()) return std::strong_ordering::less;
  auto pa = split(a, '.');
  auto pb = split(b, '.');
  for (std::size_t i = 0; i < pa.size() && i < pb.size(); ++i) {
    std::uint64_t na = 0, nb = 0;
    bool a_num = parse_uint(pa[i], na);
    bool b_num = parse_uint(pb[i], nb);
    if (a_num && b_num) {
      if (na != nb) return na <=> nb;
    } else if (a_num != b_num) {
      return a_num ? std::strong_ordering::less : std::strong_ordering::greater;
    } else if (pa[i] != pb[i]) {
      return pa[i] < pb[i] ? std::strong_ordering::less
                           : std::strong_ordering::greater;
    }
  }
  return pa.size() <=> pb.size();
}

// A version with some trailing components possibly wildcarded or omitted.
struct Partial {
  std::uint64_t parts[3] = {0, 0, 0};
  int fixed = 0;  // number of leading concrete components
  std::string prerelease;
};

Partial parse_partial(std::string_view text, const std::string& raw) {
  Partial p;
  std::string s = trim(text);
  if (!s.empty() && (s[0] == 'v' || s[0] == 'V')) s.erase(0, 1);
  if (auto plus = s.find('+'); plus != std::string::npos) s.erase(plus);
  if (auto dash = s.find('-'); dash != std::string::npos) {
    p.prerelease = s.substr(dash + 1);
    s.erase(dash);
    if (p.prerelease.empty()) {
      throw Error(ErrorCode::kSchemaError, "empty prerelease in '" + raw + "'");
    }
  }
  if (s.empty() || is_wild(s)) return p;
  auto comps = split(s, '.');
  if (comps.size() > 3) {
    throw Error(ErrorCode::kSchemaError, "too many version components in '" +
                                             raw + "'");
  }
  bool wild_seen = false;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (is_wild(comps[i])) {
      wild_seen = true;
      continue;
    }
    if (wild_seen || !parse_uint(comps[i], p.parts[i])) {
      throw Error(ErrorCode::kSchemaError,
                  "invalid version component '" + comps[i] + "' in '" + raw +
                      "'");
    }
    p.fixed = static_cast<int>(i) + 1;
  }
  if (!p.prerelease.empty() && p.fixed < 3) {
    throw Error(ErrorCode::kSchemaError,
                "prerelease requires a full version in '" + raw + "'");
  }
  return p;
}

SemVer floor_of(const Partial& p) {
  SemVer v{p.parts[0], p.parts[1], p.parts[2], p.prerelease};
  return v;
}

// First version past every version the partial covers; nullopt for "*".
std::optional<SemVer> ceiling_of(const Partial& p) {
  switch (p.fixed) {
    case 0:
      return std::nullopt;
    case 1:
      return SemVer{p.parts[0] + 1, 0, 0, {}};
    case 2:
      return SemVer{p.parts[0], p.parts[1] + 1, 0, {}};
    default:
      return std::nullopt;
  }
}

using Bound = VersionConstraint::Bound;

void tighten_lower(std::optional<Bound>& cur, const Bound& b) {
  if (!cur || cur->version < b.version ||
      (cur->version == b.version && !b.inclusive)) {
    cur = b;
  }
}

void tighten_upper(std::optional<Bound>& cur, const Bound& b) {
  if (!cur || b.version < cur->version ||
      (cur->version == b.version && !b.inclusive)) {
    cur = b;
  }
}

void apply_comparator(std::string_view op, std::string_view operand,
                      const std::string& raw, std::optional<Bound>& lower,
                      std::optional<Bound>& upper) {
  Partial p = parse_partial(operand, raw);
  auto ceil = ceiling_of(p);
  bool partial = p.fixed < 3;
  if (op == ">=") {
    if (p.fixed > 0) tighten_lower(lower, {floor_of(p), true});
  } else if (op == ">") {
    if (p.fixed == 0) {
      throw Error(ErrorCode::kSchemaError, "'>*' matches nothing in '" + raw + "'");
    }
    if (partial) {
      tighten_lower(lower, {*ceil, true});
    } else {
      tighten_lower(lower, {floor_of(p), false});
    }
  } else if (op == "<=") {
    if (p.fixed == 0) return;
    if (partial) {
      tighten_upper(upper, {*ceil, false});
    } else {
      tighten_upper(upper, {floor_of(p), true});
    }
  } else if (op == "<") {
    if (p.fixed == 0) {
      throw Error(ErrorCode::kSchemaError, "'<*' matches nothing in '" + raw + "'");
    }
    tighten_upper(upper, {floor_of(p), false});
  } else if (op == "=" || op.empty()) {
    if (p.fixed > 0) tighten_lower(lower, {floor_of(p), true});
    if (partial) {
      if (ceil) tighten_upper(upper, {*ceil, false});
    } else {
      tighten_upper(upper, {floor_of(p), true});
    }
  } else {
    throw Error(ErrorCode::kSchemaError,
                "unknown comparator '" + std::string(op) + "' in '" + raw + "'");
  }
}

std::string normalize_operators(std::string_view text) {
  std::string s(text);
  auto replace_all = [&s](std::string_view from, std::string_view to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos;
         pos = s.find(from, pos + to.size())) {
      s.replace(pos, from.size(), to);
    }
  };
  replace_all("≥", ">=");
  replace_all("≤", "<=");
  replace_all("∧", " ");
  replace_all("&&", " ");
  replace_all(",", " ");
  return s;
}

bool starts_with_op(std::string_view tok) {
  return !tok.empty() && (tok[0] == '<' || tok[0] == '>' || tok[0] == '=');
}

}  // namespace

std::strong_ordering operator<=>(const SemVer& a, const SemVer& b) {
  if (auto c = a.major <=> b.major; c != 0) return c;
  if (auto c = a.minor <=> b.minor; c != 0) return c;
  if (auto c = a.patch <=> b.patch; c != 0) return c;
  return compare_prerelease(a.prerelease, b.prerelease);
}

SemVer SemVer::parse(std::string_view text) {
  std::string raw(text);
  Partial p = parse_partial(text, raw);
  std::string s = trim(text);
  if (p.fixed == 0 || s.find_first_of("xX*") != std::string::npos) {
    throw Error(ErrorCode::kSchemaError, "not a concrete version: '" + raw + "'");
  }
  return floor_of(p);
}

std::optional<SemVer> SemVer::try_parse(std::string_view text) {
  try {
    return parse(text);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string SemVer::to_string() const {
  std::string out = std::to_string(major) + "." + std::to_string(minor) + "." +
                    std::to_string(patch);
  if (!prerelease.empty()) out += "-" + prerelease;
  return out;
}

VersionConstraint VersionConstraint::exact(const SemVer& v) {
  VersionConstraint c;
  c.kind_ = Kind::kExact;
  c.lower_ = Bound{v, true};
  c.upper_ = Bound{v, true};
  c.raw_ = v.to_string();
  return c;
}

VersionConstraint VersionConstraint::caret(std::uint64_t major) {
  VersionConstraint c;
  c.kind_ = Kind::kCaret;
  c.lower_ = Bound{SemVer{major, 0, 0, {}}, true};
  c.upper_ = Bound{SemVer{major + 1, 0, 0, {}}, false};
  c.raw_ = "^" + std::to_string(major) + ".x";
  return c;
}

VersionConstraint VersionConstraint::range(std::optional<Bound> lower,
                                           std::optional<Bound> upper) {
  VersionConstraint c;
  c.kind_ = Kind::kRange;
  c.lower_ = std::move(lower);
  c.upper_ = std::move(upper);
  c.raw_.clear();
  if (c.lower_) {
    c.raw_ += (c.lower_->inclusive ? ">=" : ">") + c.lower_->version.to_string();
  }
  if (c.upper_) {
    if (!c.raw_.empty()) c.raw_ += " ";
    c.raw_ += (c.upper_->inclusive ? "<=" : "<") + c.upper_->version.to_string();
  }
  if (c.raw_.empty()) c.raw_ = "*";
  return c;
}

VersionConstraint VersionConstraint::parse(std::string_view text) {
  const std::string raw = trim(text);
  if (raw.empty()) {
    throw Error(ErrorCode::kSchemaError, "empty version constraint");
  }
  VersionConstraint c;
  c.raw_ = raw;

  if (raw[0] == '^') {
    Partial p = parse_partial(std::string_view(raw).substr(1), raw);
    if (p.fixed == 0) {
      throw Error(ErrorCode::kSchemaError, "caret needs a major version: '" + raw + "'");
    }
    c.kind_ = Kind::kCaret;
    c.lower_ = Bound{floor_of(p), true};
    c.upper_ = Bound{SemVer{p.parts[0] + 1, 0, 0, {}}, false};
    return c;
  }

  std::string norm = normalize_operators(raw);
  std::vector<std::string> tokens;
  for (auto& t : split(norm, ' ')) {
    if (t.empty() || iequals(t, "and")) continue;
    tokens.push_back(t);
  }

  // Hyphen range "A - B".
  if (tokens.size() == 3 && tokens[1] == "-") {
    c.kind_ = Kind::kRange;
    Partial lo = parse_partial(tokens[0], raw);
    Partial hi = parse_partial(tokens[2], raw);
    if (lo.fixed > 0) c.lower_ = Bound{floor_of(lo), true};
    if (hi.fixed == 3) {
      c.upper_ = Bound{floor_of(hi), true};
    } else if (auto ceil = ceiling_of(hi)) {
      c.upper_ = Bound{*ceil, false};
    }
    return c;
  }

  bool has_ops = false;
  for (const auto& t : tokens) has_ops = has_ops || starts_with_op(t);

  if (!has_ops) {
    if (tokens.size() != 1) {
      throw Error(ErrorCode::kSchemaError, "malformed version constraint '" + raw + "'");
    }
    Partial p = parse_partial(tokens[0], raw);
    if (p.fixed == 3) {
      c.kind_ = Kind::kExact;
      c.lower_ = Bound{floor_of(p), true};
      c.upper_ = Bound{floor_of(p), true};
    } else {
      c.kind_ = Kind::kWildcard;
      if (p.fixed > 0) c.lower_ = Bound{floor_of(p), true};
      if (auto ceil = ceiling_of(p)) c.upper_ = Bound{*ceil, false};
    }
    return c;
  }

  c.kind_ = Kind::kRange;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    std::size_t op_len = 0;
    while (op_len < t.size() && starts_with_op(t.substr(op_len, 1))) ++op_len;
    if (op_len == 0) {
      throw Error(ErrorCode::kSchemaError,
                  "expected comparator before '" + t + "' in '" + raw + "'");
    }
    std::string op = t.substr(0, op_len);
    std::string operand = t.substr(op_len);
    if (operand.empty()) {
      if (i + 1 >= tokens.size()) {
        throw Error(ErrorCode::kSchemaError, "dangling comparator in '" + raw + "'");
      }
      operand = tokens[++i];
    }
    apply_comparator(op, operand, raw, c.lower_, c.upper_);
  }
  // "=1.2.3" alone is an exact requirement.
  if (tokens.size() <= 2 && tokens[0][0] == '=' && c.lower_ && c.upper_ &&
      c.lower_->version == c.upper_->version && c.upper_->inclusive) {
    c.kind_ = Kind::kExact;
  }
  return c;
}

bool VersionConstraint::matches(const SemVer& v) const {
  if (v.has_prerelease()) {
    bool named = (lower_ && lower_->version.has_prerelease() &&
                  lower_->version.same_triple(v)) ||
                 (upper_ && upper_->version.has_prerelease() &&
                  upper_->version.same_triple(v));
    if (!named) return false;
  }
  if (lower_) {
    auto c = v <=> lower_->version;
    if (c < 0 || (c == 0 && !lower_->inclusive)) return false;
  }
  if (upper_) {
    auto c = v <=> upper_->version;
    if (c > 0 || (c == 0 && !upper_->inclusive)) return false;
  }
  return true;
}

std::string_view to_string(VersionConstraint::Kind kind) {
  switch (kind) {
    case VersionConstraint::Kind::kExact:
      return "exact";
    case VersionConstraint::Kind::kCaret:
      return "caret";
    case VersionConstraint::Kind::kRange:
      return "range";
    case VersionConstraint::Kind::kWildcard:
      return "wildcard";
  }
  return "wildcard";
}

}  // namespace evalmesh::manifest
