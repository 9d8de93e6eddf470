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

#include <gtest/gtest.h>

#include <random>

#include "evalmesh/common/error.hpp"
#include "evalmesh/manifest/semver.hpp"

namespace evalmesh::manifest {
namespace {

SemVer v(const char* s) { return SemVer::parse(s); }
VersionConstraint c(const char* s) { return VersionConstraint::parse(s); }

TEST(SemVerTest, ParsesAndRendersCanonically) {
  EXPECT_EQ(v("1.13.0").to_string(), "1.13.0");
  EXPECT_EQ(v("1.13.0-rc2").to_string(), "1.13.0-rc2");
  EXPECT_EQ(v("1.0").to_string(), "1.0.0");
  EXPECT_EQ(v("2").to_string(), "2.0.0");
  EXPECT_EQ(v("v1.2.3+build.5").to_string(), "1.2.3");
}

TEST(SemVerTest, RejectsMalformed) {
  for (const char* bad : {"", "a.b.c", "1.2.3.4", "1.x", "1..2", "1.2.3-", "-1"}) {
    EXPECT_THROW(SemVer::parse(bad), Error) << bad;
  }
}

TEST(SemVerTest, PrereleaseSortsBelowRelease) {
  EXPECT_LT(v("1.13.0-rc2"), v("1.13.0"));
  EXPECT_LT(v("1.13.0-alpha"), v("1.13.0-beta"));
  EXPECT_LT(v("1.0.0-2"), v("1.0.0-10"));
  EXPECT_LT(v("1.0.0-rc.1"), v("1.0.0-rc.1.1"));
  EXPECT_LT(v("1.9.9"), v("1.10.0"));
}

TEST(SemVerTest, RenderParseRoundTripProperty) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> part(0, 40);
  const char* labels[] = {"", "rc1", "alpha.1", "beta", "0.3"};
  for (int i = 0; i < 500; ++i) {
    SemVer a{static_cast<std::uint64_t>(part(rng)), static_cast<std::uint64_t>(part(rng)),
             static_cast<std::uint64_t>(part(rng)), labels[part(rng) % 5]};
    EXPECT_EQ(SemVer::parse(a.to_string()), a);
    EXPECT_EQ(SemVer::parse(a.to_string()).to_string(), a.to_string());
  }
}

TEST(ConstraintTest, CaretOnMajor) {
  auto caret = c("^1.x");
  EXPECT_EQ(caret.kind(), VersionConstraint::Kind::kCaret);
  EXPECT_TRUE(caret.matches(v("1.13.0")));
  EXPECT_TRUE(caret.matches(v("1.0.0")));
  EXPECT_TRUE(caret.matches(v("1.99.3")));
  EXPECT_FALSE(caret.matches(v("2.0.0")));
  EXPECT_FALSE(caret.matches(v("0.9.9")));
  EXPECT_EQ(caret, VersionConstraint::caret(1));
}

TEST(ConstraintTest, InclusiveRangeFromFlowExample) {
  for (const char* text : {">=1.10.x <=1.13.0", "≥1.10.x ∧ ≤1.13.0",
                           ">=1.10.0, <=1.13.0", ">= 1.10.x and <= 1.13.0",
                           "1.10.0 - 1.13.0"}) {
    auto r = c(text);
    EXPECT_EQ(r.kind(), VersionConstraint::Kind::kRange) << text;
    EXPECT_TRUE(r.matches(v("1.12.0"))) << text;
    EXPECT_TRUE(r.matches(v("1.10.0"))) << text;
    EXPECT_TRUE(r.matches(v("1.13.0"))) << text;
    EXPECT_FALSE(r.matches(v("1.13.1"))) << text;
    EXPECT_FALSE(r.matches(v("1.9.7"))) << text;
  }
}

TEST(ConstraintTest, WildcardPositions) {
  auto w = c("1.12.x");
  EXPECT_EQ(w.kind(), VersionConstraint::Kind::kWildcard);
  EXPECT_TRUE(w.matches(v("1.12.0")));
  EXPECT_TRUE(w.matches(v("1.12.7")));
  EXPECT_FALSE(w.matches(v("1.13.0")));
  EXPECT_TRUE(c("*").matches(v("42.1.0")));
  EXPECT_TRUE(c("1.x").matches(v("1.4.0")));
  EXPECT_FALSE(c("1.x").matches(v("2.0.0")));
}

TEST(ConstraintTest, ExactAndExclusiveBounds) {
  EXPECT_EQ(c("1.13.0").kind(), VersionConstraint::Kind::kExact);
  EXPECT_EQ(c("=1.13.0").kind(), VersionConstraint::Kind::kExact);
  EXPECT_TRUE(c("1.13.0").matches(v("1.13.0")));
  EXPECT_FALSE(c("1.13.0").matches(v("1.13.1")));
  EXPECT_FALSE(c(">1.2.3").matches(v("1.2.3")));
  EXPECT_TRUE(c(">1.2.3").matches(v("1.2.4")));
  EXPECT_FALSE(c("<1.2.x").matches(v("1.2.0")));
  EXPECT_TRUE(c("<=1.2.x").matches(v("1.2.99")));
}

TEST(ConstraintTest, PrereleaseOnlyWhenNamed) {
  EXPECT_FALSE(c("^1.x").matches(v("1.13.0-rc2")));
  EXPECT_FALSE(c(">=1.10.0 <=1.13.0").matches(v("1.12.0-rc1")));
  EXPECT_TRUE(c(">=1.13.0-rc1 <=1.13.0").matches(v("1.13.0-rc2")));
  EXPECT_FALSE(c(">=1.13.0-rc1 <=1.13.0").matches(v("1.12.0-rc2")));
  EXPECT_TRUE(c("1.13.0-rc2").matches(v("1.13.0-rc2")));
}

TEST(ConstraintTest, RejectsMalformed) {
  for (const char* bad : {"", "^", "^x", ">=", "~1.2.3", "1.2.3 1.2.4", ">=a.b",
                          ">*", "1.x.3"}) {
    EXPECT_THROW(VersionConstraint::parse(bad), Error) << bad;
  }
}

// Random versions and intervals; exact/caret/subset algebra must hold.
TEST(ConstraintTest, AlgebraProperties) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> part(0, 4);
  auto rand_version = [&] {
    return SemVer{static_cast<std::uint64_t>(part(rng)),
                  static_cast<std::uint64_t>(part(rng)),
                  static_cast<std::uint64_t>(part(rng)), {}};
  };
  for (int i = 0; i < 2000; ++i) {
    SemVer a = rand_version();
    SemVer b = rand_version();
    EXPECT_EQ(VersionConstraint::exact(a).matches(b), a == b);
    EXPECT_TRUE(VersionConstraint::caret(a.major).matches(a));

    SemVer lo = rand_version(), hi = rand_version();
    if (hi < lo) std::swap(lo, hi);
    SemVer lo2 = lo, hi2 = hi;
    // c1 = [lo, hi] nested inside c2 = [lo2', hi2'].
    if (lo2.patch > 0) --lo2.patch;
    ++hi2.minor;
    auto c1 = VersionConstraint::range(VersionConstraint::Bound{lo, true},
                                       VersionConstraint::Bound{hi, true});
    auto c2 = VersionConstraint::range(VersionConstraint::Bound{lo2, true},
                                       VersionConstraint::Bound{hi2, false});
    if (c1.matches(b)) {
      EXPECT_TRUE(c2.matches(b));
    }
    // Re-parsing a range's rendering gives the same interval.
    EXPECT_EQ(VersionConstraint::parse(c1.raw()), c1);
  }
}

}  // namespace
}  // namespace evalmesh::manifest
