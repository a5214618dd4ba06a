// Copyright 2026 The dlflow Authors
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

#include "learners/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/rng.hpp"

namespace dlflow::learners {
namespace {

const std::vector<std::string>& common_words() {
  static const std::vector<std::string> words = {
      "the",     "a",        "of",       "and",     "to",       "in",      "said",
      "was",     "for",      "on",       "with",    "that",     "has",     "have",
      "year",    "people",   "new",      "also",    "would",    "which",   "been",
      "after",   "last",     "first",    "about",   "more",     "could",   "their",
      "some",    "because",  "during",   "several", "including", "while",  "expected",
      "reported", "according", "following", "recently", "announced"};
  return words;
}

const std::map<std::string, std::vector<std::string>>& topic_words() {
  static const std::map<std::string, std::vector<std::string>> words = {
      {"business",
       {"market", "shares", "profits", "company", "economy", "investors", "bank",
        "growth", "prices", "sales", "trading", "earnings", "quarterly", "firms",
        "deal", "rates", "inflation", "stocks", "exports", "revenue", "merger",
        "chief", "executive", "customers", "analysts"}},
      {"entertainment",
       {"film", "music", "actor", "awards", "singer", "album", "festival",
        "director", "movie", "stars", "comedy", "theatre", "band", "chart",
        "television", "drama", "nominated", "oscar", "show", "audiences",
        "concert", "actress", "studio", "release", "celebrity"}},
      {"politics",
       {"government", "minister", "election", "party", "labour", "tory", "vote",
        "parliament", "campaign", "policy", "leader", "voters", "commons",
        "secretary", "reform", "debate", "council", "ministers", "tax",
        "opposition", "elections", "bill", "lords", "prime", "manifesto"}},
      {"sport",
       {"match", "team", "players", "game", "win", "coach", "season", "league",
        "champion", "cup", "injury", "goal", "victory", "football", "rugby",
        "tennis", "final", "played", "scored", "squad", "defeat", "playing",
        "tournament", "striker", "winning"}},
      {"tech",
       {"software", "users", "computer", "mobile", "phone", "internet", "digital",
        "technology", "online", "network", "devices", "broadband", "games",
        "microsoft", "search", "website", "security", "virus", "gadgets",
        "programs", "servers", "consumers", "wireless", "downloading", "systems"}},
  };
  return words;
}

// Category word list; unknown categories get generated pseudo-words.
std::vector<std::string> words_for(const std::string& category) {
  auto it = topic_words().find(category);
  if (it != topic_words().end()) return it->second;
  std::vector<std::string> out;
  Rng rng(keyed_hash64(0, category));
  for (int i = 0; i < 25; ++i) {
    std::string w;
    const int len = 4 + static_cast<int>(rng.uniform_index(5));
    for (int k = 0; k < len; ++k) w.push_back(static_cast<char>('a' + rng.uniform_index(26)));
    out.push_back(w);
  }
  return out;
}

std::string pick(Rng& rng, const std::vector<std::string>& words) {
  return words[rng.uniform_index(words.size())];
}

}  // namespace

std::map<std::string, std::string> synth_corpus(const CorpusOptions& options) {
  if (options.docs_per_class < 1 || options.categories.empty()) {
    fail(ErrorCode::kInvalidArgument, "corpus needs at least one category and document");
  }
  Rng rng(options.seed);
  std::vector<std::vector<std::string>> topics;
  for (const auto& c : options.categories) topics.push_back(words_for(c));

  std::map<std::string, std::string> files;
  for (std::size_t ci = 0; ci < options.categories.size(); ++ci) {
    for (int d = 1; d <= options.docs_per_class; ++d) {
      char name[32];
      std::snprintf(name, sizeof name, "/%04d.txt", d);
      const std::string path = options.categories[ci] + name;

      std::string text;
      const bool is_short = rng.bernoulli(options.short_fraction);
      const int sentences = is_short ? 1 : 3 + static_cast<int>(rng.uniform_index(4));
      for (int s = 0; s < sentences; ++s) {
        const int len = is_short ? 3 : 8 + static_cast<int>(rng.uniform_index(8));
        for (int w = 0; w < len; ++w) {
          std::string word;
          const double u = rng.uniform01();
          if (u < 0.55) {
            word = pick(rng, common_words());
          } else if (u < 0.85 || topics.size() == 1) {
            word = pick(rng, topics[ci]);
          } else {
            // topical noise from a different category
            const std::size_t other = (ci + 1 + rng.uniform_index(topics.size() - 1)) % topics.size();
            word = pick(rng, topics[other]);
          }
          if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
          text += word;
          text += w + 1 < len ? " " : ". ";
        }
      }
      if (!text.empty()) text.pop_back();
      if (rng.bernoulli(options.invalid_utf8_fraction)) {
        text.insert(rng.uniform_index(text.size()), 1, static_cast<char>(0xFF));
      }
      text.push_back('\n');
      files.emplace(path, std::move(text));
    }
  }
  return files;
}

namespace {

using Canvas = std::array<double, kImagePixels>;

void fill_rect(Canvas& c, int x0, int y0, int x1, int y1, double v) {
  for (int y = std::max(0, y0); y < std::min(kImageSide, y1); ++y) {
    for (int x = std::max(0, x0); x < std::min(kImageSide, x1); ++x) c[y * kImageSide + x] = v;
  }
}

void fill_ellipse(Canvas& c, double cx, double cy, double rx, double ry, double v) {
  for (int y = 0; y < kImageSide; ++y) {
    for (int x = 0; x < kImageSide; ++x) {
      const double dx = (x - cx) / rx;
      const double dy = (y - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) c[y * kImageSide + x] = v;
    }
  }
}

// Coarse silhouettes loosely shaped like the garment classes.
Canvas prototype(int cls) {
  Canvas c{};
  switch (cls % 10) {
    case 0:  // t-shirt: torso plus short sleeves
      fill_rect(c, 8, 6, 20, 24, 200);
      fill_rect(c, 3, 6, 25, 11, 200);
      break;
    case 1:  // trouser: two legs
      fill_rect(c, 8, 3, 20, 8, 180);
      fill_rect(c, 8, 8, 13, 26, 180);
      fill_rect(c, 15, 8, 20, 26, 180);
      break;
    case 2:  // pullover: torso plus long sleeves
      fill_rect(c, 8, 5, 20, 23, 160);
      fill_rect(c, 3, 5, 8, 22, 140);
      fill_rect(c, 20, 5, 25, 22, 140);
      break;
    case 3:  // dress: flared
      for (int y = 4; y < 26; ++y) {
        const int half = 3 + (y - 4) / 3;
        fill_rect(c, 14 - half, y, 14 + half, y + 1, 190);
      }
      break;
    case 4:  // coat: long body, open front
      fill_rect(c, 6, 4, 22, 26, 120);
      fill_rect(c, 13, 8, 15, 26, 0);
      fill_rect(c, 2, 5, 6, 24, 110);
      fill_rect(c, 22, 5, 26, 24, 110);
      break;
    case 5:  // sandal: thin straps
      for (int k = 0; k < 4; ++k) fill_rect(c, 3, 12 + 3 * k, 25, 13 + 3 * k, 170);
      break;
    case 6:  // shirt: collar and buttons
      fill_rect(c, 7, 5, 21, 25, 140);
      fill_rect(c, 11, 5, 17, 8, 230);
      for (int k = 0; k < 5; ++k) fill_rect(c, 13, 10 + 3 * k, 15, 11 + 3 * k, 30);
      break;
    case 7:  // sneaker: low wedge
      fill_rect(c, 3, 16, 25, 22, 200);
      fill_rect(c, 12, 11, 22, 16, 180);
      break;
    case 8:  // bag: box with handle
      fill_rect(c, 5, 11, 23, 25, 150);
      fill_ellipse(c, 14, 9, 5, 4, 150);
      fill_ellipse(c, 14, 9, 3, 2, 0);
      break;
    default:  // ankle boot: tall shaft plus sole
      fill_rect(c, 12, 4, 21, 22, 210);
      fill_rect(c, 4, 17, 24, 23, 210);
      break;
  }
  return c;
}

void put_be32(std::string& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint32_t get_be32(std::string_view data, std::size_t at) {
  if (at + 4 > data.size()) fail(ErrorCode::kMalformedRow, "truncated IDX header");
  uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<uint8_t>(data[at + i]);
  return v;
}

}  // namespace

std::vector<Image> synth_images(int classes, int per_class, uint64_t seed) {
  if (classes < 1 || per_class < 1) {
    fail(ErrorCode::kInvalidArgument, "image counts must be positive");
  }
  Rng rng(seed);
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(classes) * static_cast<std::size_t>(per_class));
  for (int i = 0; i < per_class; ++i) {
    for (int cls = 0; cls < classes; ++cls) {
      const Canvas proto = prototype(cls);
      const double contrast = rng.uniform(0.7, 1.1);
      const int sx = static_cast<int>(rng.uniform_index(5)) - 2;
      const int sy = static_cast<int>(rng.uniform_index(5)) - 2;
      Image img;
      img.label = cls;
      for (int y = 0; y < kImageSide; ++y) {
        for (int x = 0; x < kImageSide; ++x) {
          const int px = x - sx;
          const int py = y - sy;
          double v = 0.0;
          if (px >= 0 && px < kImageSide && py >= 0 && py < kImageSide) {
            v = proto[py * kImageSide + px] * contrast;
          }
          v += rng.normal() * 25.0;
          img.pixels[y * kImageSide + x] =
              static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
      }
      out.push_back(img);
    }
  }
  return out;
}

std::string encode_idx_images(const std::vector<Image>& images) {
  std::string out;
  put_be32(out, 0x00000803);
  put_be32(out, static_cast<uint32_t>(images.size()));
  put_be32(out, kImageSide);
  put_be32(out, kImageSide);
  for (const auto& img : images) {
    out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  }
  return out;
}

std::string encode_idx_labels(const std::vector<Image>& images) {
  std::string out;
  put_be32(out, 0x00000801);
  put_be32(out, static_cast<uint32_t>(images.size()));
  for (const auto& img : images) out.push_back(static_cast<char>(img.label));
  return out;
}

std::vector<Image> decode_idx(std::string_view images_idx, std::string_view labels_idx) {
  if (get_be32(images_idx, 0) != 0x00000803 || get_be32(labels_idx, 0) != 0x00000801) {
    fail(ErrorCode::kMalformedRow, "bad IDX magic");
  }
  const uint32_t n = get_be32(images_idx, 4);
  if (get_be32(labels_idx, 4) != n) fail(ErrorCode::kMalformedRow, "IDX image/label count mismatch");
  if (get_be32(images_idx, 8) != kImageSide || get_be32(images_idx, 12) != kImageSide) {
    fail(ErrorCode::kShapeMismatch, "IDX images must be 28x28");
  }
  if (images_idx.size() != 16 + static_cast<std::size_t>(n) * kImagePixels ||
      labels_idx.size() != 8 + static_cast<std::size_t>(n)) {
    fail(ErrorCode::kMalformedRow, "IDX payload size mismatch");
  }
  std::vector<Image> out(n);
  for (uint32_t i = 0; i < n; ++i) {
    std::copy_n(reinterpret_cast<const uint8_t*>(images_idx.data()) + 16 + std::size_t{i} * kImagePixels,
                kImagePixels, out[i].pixels.begin());
    out[i].label = static_cast<uint8_t>(labels_idx[8 + i]);
  }
  return out;
}

}  // namespace dlflow::learners
