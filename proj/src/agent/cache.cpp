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

#include "evalmesh/agent/cache.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <filesystem>
#include <fstream>

#include "evalmesh/common/clock.hpp"
#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"

namespace evalmesh::agent {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> fetch_http(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end + 3);
  const auto origin = url.substr(0, path_start);
  const auto path = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  auto res = client.Get(path);
  if (!res) {
    throw Error(ErrorCode::kFetchError,
                "GET " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kFetchError, "GET " + url + " returned " + std::to_string(res->status));
  }
  return {res->body.begin(), res->body.end()};
}

}  // namespace

std::vector<std::uint8_t> DefaultFetcher::fetch(const std::string& url) {
  if (url.starts_with("http://") || url.starts_with("https://")) return fetch_http(url);
  std::string path = url;
  if (url.starts_with("file://")) {
    path = url.substr(7);
  } else if (url.find("://") != std::string::npos) {
    throw Error(ErrorCode::kFetchError, "unsupported url scheme in " + url);
  }
  try {
    return read_file_bytes(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFetchError, "cannot read " + url + ": " + e.what());
  }
}

AssetCache::AssetCache(std::string dir, std::shared_ptr<Fetcher> fetcher)
    : dir_(std::move(dir)),
      fetcher_(fetcher ? std::move(fetcher) : std::make_shared<DefaultFetcher>()) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw Error(ErrorCode::kInvalidArgument, "cache directory " + dir_ + " is not usable",
                "cache_dir");
  }
}

std::string AssetCache::local_path(const std::string& url) const {
  auto name = fs::path(url.substr(url.find_last_of('/') + 1)).filename().string();
  std::erase_if(name, [](char c) {
    return !(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_');
  });
  return (fs::path(dir_) / (sha256_hex(url).substr(0, 16) + "-" + name)).string();
}

std::string AssetCache::get(const std::string& url, const std::optional<std::string>& expected) {
  std::shared_future<CacheEntry> pending;
  std::promise<CacheEntry> mine;
  bool owner = false;
  {
    std::unique_lock lock(mu_);
    if (auto it = entries_.find(url); it != entries_.end()) {
      const auto entry = it->second;
      lock.unlock();
      std::string actual;
      try {
        actual = sha256_hex(read_file_bytes(entry.path));
      } catch (const Error&) {
      }
      if (actual == entry.sha256 && (!expected || iequals(*expected, actual))) return entry.path;
      lock.lock();
      // Someone else may already have replaced it.
      if (auto again = entries_.find(url);
          again != entries_.end() && again->second.fetched_at_ms == entry.fetched_at_ms &&
          again->second.sha256 == entry.sha256) {
        entries_.erase(again);
      }
    }
    if (auto it = entries_.find(url); it != entries_.end()) {
      return it->second.path;
    }
    if (auto it = inflight_.find(url); it != inflight_.end()) {
      pending = it->second;
    } else {
      pending = mine.get_future().share();
      inflight_.emplace(url, pending);
      owner = true;
    }
  }
  if (!owner) {
    const auto entry = pending.get();
    if (expected && !iequals(*expected, entry.sha256)) {
      throw Error(ErrorCode::kChecksumMismatch,
                  url + " has sha256 " + entry.sha256 + ", expected " + *expected);
    }
    return entry.path;
  }
  try {
    auto entry = download(url, expected);
    {
      std::lock_guard lock(mu_);
      entries_[url] = entry;
      inflight_.erase(url);
    }
    mine.set_value(entry);
    return entry.path;
  } catch (...) {
    {
      std::lock_guard lock(mu_);
      inflight_.erase(url);
    }
    mine.set_exception(std::current_exception());
    throw;
  }
}

CacheEntry AssetCache::download(const std::string& url, const std::optional<std::string>& expected) {
  ++fetches_;
  const auto bytes = fetcher_->fetch(url);
  const auto digest = sha256_hex(bytes);
  if (expected && !iequals(*expected, digest)) {
    throw Error(ErrorCode::kChecksumMismatch,
                url + " has sha256 " + digest + ", expected " + *expected);
  }
  const auto path = local_path(url);
  const auto tmp = path + ".part";
  write_file_bytes(tmp, bytes);
  fs::rename(tmp, path);
  return {url, path, digest, wall_clock_ms()};
}

std::vector<std::uint8_t> AssetCache::read(const std::string& url,
                                           const std::optional<std::string>& expected) {
  return read_file_bytes(get(url, expected));
}

std::optional<CacheEntry> AssetCache::entry(const std::string& url) const {
  std::lock_guard lock(mu_);
  if (auto it = entries_.find(url); it != entries_.end()) return it->second;
  return std::nullopt;
}

void AssetCache::invalidate(const std::string& url) {
  std::lock_guard lock(mu_);
  if (auto it = entries_.find(url); it != entries_.end()) {
    std::error_code ec;
    fs::remove(it->second.path, ec);
    entries_.erase(it);
  }
}

std::size_t AssetCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

}  // namespace evalmesh::agent
