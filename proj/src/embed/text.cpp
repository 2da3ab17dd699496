#include <cmath>
#include <cstdio>
#include <numbers>
#include <thread>

#include "httplib.h"
#include "ipag/embed.hpp"
#include "ipag/io.hpp"
#include "json.hpp"

namespace ipag {

using json = nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in (0, 1].
double unit_open(std::uint64_t& state) {
  return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
}

std::uint64_t fnv1a64_from(std::uint64_t h, std::string_view text) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) { return fnv1a64_from(0xcbf29ce484222325ULL, text); }

std::string_view to_string(EmbedMode mode) { return mode == EmbedMode::hash ? "hash" : "service"; }

EmbedMode embed_mode_from_string(std::string_view text) {
  if (text == "hash") return EmbedMode::hash;
  if (text == "service") return EmbedMode::service;
  throw EmbedError("unknown embed mode '" + std::string(text) + "'");
}

HashEmbedder::HashEmbedder(std::size_t width, std::uint64_t seed) : width_(width), seed_(seed) {
  if (width == 0) throw EmbedError("text embedding width must be positive");
}

std::vector<double> HashEmbedder::vector_for(std::string_view text) const {
  std::uint64_t state = fnv1a64(text);
  std::uint64_t mix = seed_;
  state ^= splitmix64(mix);
  std::vector<double> v(width_);
  for (std::size_t i = 0; i < width_; i += 2) {
    // Box-Muller
    const double r = std::sqrt(-2.0 * std::log(unit_open(state)));
    const double t = 2.0 * std::numbers::pi * unit_open(state);
    v[i] = r * std::cos(t);
    if (i + 1 < width_) v[i + 1] = r * std::sin(t);
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<std::vector<double>> HashEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(vector_for(t));
  return out;
}

ServiceEmbedder::ServiceEmbedder(ServiceOptions options)
    : options_(std::move(options)), fallback_(options_.width, options_.fallback_seed) {
  if (options_.batch == 0) options_.batch = 1;
}

bool ServiceEmbedder::healthy() const {
  if (options_.endpoint.empty()) return false;
  httplib::Client cli(options_.endpoint);
  cli.set_connection_timeout(options_.timeout);
  cli.set_read_timeout(options_.timeout);
  auto res = cli.Get("/healthz");
  return res && res->status == 200;
}

std::string ServiceEmbedder::model_id() const {
  std::lock_guard lock(mutex_);
  return model_id_;
}

bool ServiceEmbedder::fell_back() const {
  std::lock_guard lock(mutex_);
  return fell_back_;
}

std::vector<std::string> ServiceEmbedder::warnings() const {
  std::lock_guard lock(mutex_);
  return warnings_;
}

std::optional<std::vector<std::vector<double>>> ServiceEmbedder::request(
    const std::vector<std::string>& texts, std::string& error) {
  if (options_.endpoint.empty()) {
    error = "no embedding endpoint configured";
    return std::nullopt;
  }
  httplib::Client cli(options_.endpoint);
  cli.set_connection_timeout(options_.timeout);
  cli.set_read_timeout(options_.timeout);
  const std::string body = json{{"texts", texts}, {"width", options_.width}}.dump();
  auto res = cli.Post("/embed", body, "application/json");
  if (!res) {
    error = "request failed: " + httplib::to_string(res.error());
    return std::nullopt;
  }
  if (res->status != 200) {
    error = "status " + std::to_string(res->status);
    return std::nullopt;
  }
  try {
    const json reply = json::parse(res->body);
    auto vectors = reply.at("vectors").get<std::vector<std::vector<double>>>();
    if (vectors.size() != texts.size()) {
      error = "reply has " + std::to_string(vectors.size()) + " vectors for " +
              std::to_string(texts.size()) + " texts";
      return std::nullopt;
    }
    for (const auto& v : vectors)
      if (v.size() != options_.width) {
        error = "reply vector has width " + std::to_string(v.size()) + ", expected " +
                std::to_string(options_.width);
        return std::nullopt;
      }
    std::lock_guard lock(mutex_);
    model_id_ = reply.value("model_id", std::string());
    return vectors;
  } catch (const json::exception& e) {
    error = std::string("malformed reply: ") + e.what();
    return std::nullopt;
  }
}

std::vector<std::vector<double>> ServiceEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += options_.batch) {
    const std::size_t end = std::min(texts.size(), start + options_.batch);
    const std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                         texts.begin() + static_cast<std::ptrdiff_t>(end));
    std::string error;
    std::optional<std::vector<std::vector<double>>> got;
    auto wait = options_.backoff;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(wait);
        wait *= 2;
      }
      got = request(chunk, error);
      // Client errors will not improve on retry.
      if (got || error.rfind("status 4", 0) == 0) break;
    }
    if (!got) {
      if (options_.strict) throw EmbedError("embedding service at '" + options_.endpoint + "': " + error);
      {
        std::lock_guard lock(mutex_);
        fell_back_ = true;
        warnings_.push_back("embedding service unavailable (" + error + "); using hash vectors for " +
                            std::to_string(chunk.size()) + " labels");
      }
      got = fallback_.embed(chunk);
    }
    for (auto& v : *got) out.push_back(std::move(v));
  }
  return out;
}

std::string EmbeddingCache::key(EmbedMode mode, std::size_t width, std::string_view label) {
  // Two FNV lanes so that a clash needs 128 bits to line up.
  return std::string(to_string(mode)) + ":" + std::to_string(width) + ":" + hex(fnv1a64(label)) +
         hex(fnv1a64_from(0x84222325cbf29ce4ULL, label));
}

void EmbeddingCache::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return;
  std::lock_guard lock(mutex_);
  try {
    const json j = json::parse(read_file(path));
    if (j.value("version", 0) != 1) throw EmbedError("unsupported cache version in " + path.string());
    for (const auto& [k, v] : j.at("entries").items()) entries_[k] = v.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw EmbedError("cannot read embedding cache " + path.string() + ": " + e.what());
  }
}

void EmbeddingCache::save(const std::filesystem::path& path) const {
  std::lock_guard lock(mutex_);
  json entries = json::object();
  for (const auto& [k, v] : entries_) entries[k] = v;
  write_file_atomic(path, json{{"version", 1}, {"entries", entries}}.dump());
}

std::optional<std::vector<double>> EmbeddingCache::get(EmbedMode mode, std::size_t width,
                                                       std::string_view label) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key(mode, width, label));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::put(EmbedMode mode, std::size_t width, std::string_view label, std::vector<double> v) {
  std::lock_guard lock(mutex_);
  entries_[key(mode, width, label)] = std::move(v);
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::vector<std::vector<double>> CachingEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out(texts.size());
  std::vector<std::string> missing;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (auto v = cache_.get(mode(), width(), texts[i])) {
      out[i] = std::move(*v);
    } else {
      missing.push_back(texts[i]);
      where.push_back(i);
    }
  }
  if (!missing.empty()) {
    auto fresh = inner_.embed(missing);
    // Fallback vectors must not be stored under the service's key.
    const bool keep = !inner_.degraded();
    for (std::size_t j = 0; j < fresh.size(); ++j) {
      if (keep) cache_.put(mode(), width(), missing[j], fresh[j]);
      out[where[j]] = std::move(fresh[j]);
    }
  }
  return out;
}

}  // namespace ipag
