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

#include <atomic>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace evalmesh::agent {

// Retrieves the bytes behind a URL: file://, http://, https:// or a bare
// filesystem path. Throws Error(kFetchError).
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual std::vector<std::uint8_t> fetch(const std::string& url) = 0;
};

class DefaultFetcher final : public Fetcher {
 public:
  std::vector<std::uint8_t> fetch(const std::string& url) override;
};

struct CacheEntry {
  std::string url;
  std::string path;
  std::string sha256;
  std::int64_t fetched_at_ms = 0;
};

// Download-once file cache. Concurrent requests for one URL share a single
// fetch; a hit re-hashes the local copy and refetches when it no longer
// matches the recorded or expected digest.
class AssetCache {
 public:
  explicit AssetCache(std::string dir, std::shared_ptr<Fetcher> fetcher = nullptr);

  // Returns the local path. Throws Error(kFetchError) or, when the fetched
  // content does not match `expected_sha256`, Error(kChecksumMismatch).
  std::string get(const std::string& url,
                  const std::optional<std::string>& expected_sha256 = std::nullopt);
  std::vector<std::uint8_t> read(const std::string& url,
                                 const std::optional<std::string>& expected_sha256 = std::nullopt);

  std::optional<CacheEntry> entry(const std::string& url) const;
  void invalidate(const std::string& url);

  std::uint64_t fetch_count() const { return fetches_.load(); }
  std::size_t size() const;
  const std::string& dir() const { return dir_; }

 private:
  CacheEntry download(const std::string& url, const std::optional<std::string>& expected);
  std::string local_path(const std::string& url) const;

  std::string dir_;
  std::shared_ptr<Fetcher> fetcher_;
  mutable std::mutex mu_;
  std::map<std::string, CacheEntry> entries_;
  std::map<std::string, std::shared_future<CacheEntry>> inflight_;
  std::atomic<std::uint64_t> fetches_{0};
};

}  // namespace evalmesh::agent
