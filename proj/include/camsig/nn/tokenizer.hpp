#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "camsig/common.hpp"

namespace camsig::nn {

// Token id sequence; always ends with the end-of-sequence id.
struct TokenSeq {
  std::vector<int> ids;

  int length() const { return static_cast<int>(ids.size()); }
};

// Greedy longest-match word-piece tokenizer. Pieces occurring mid-word are
// stored with a "##" prefix; single-byte pieces of both kinds are always in
// the vocabulary, so any whitespace-normalized text round-trips exactly.
class Tokenizer {
 public:
  static constexpr int kEos = 0;

  Tokenizer() = default;

  static Tokenizer from_vocab(std::vector<std::string> vocab) {
    Tokenizer t;
    t.vocab_ = std::move(vocab);
    for (size_t i = 1; i < t.vocab_.size(); ++i) {
      const std::string& piece = t.vocab_[i];
      if (piece.rfind("##", 0) == 0) {
        const std::string body = piece.substr(2);
        t.cont_lookup_[body] = static_cast<int>(i);
        t.max_piece_len_ = std::max(t.max_piece_len_, body.size());
      } else {
        t.init_lookup_[piece] = static_cast<int>(i);
        t.max_piece_len_ = std::max(t.max_piece_len_, piece.size());
      }
    }
    return t;
  }

  // Vocabulary: <eos>, byte fallbacks (word-initial and continuation), forced
  // words, then the most frequent corpus words (count desc, lexicographic).
  static Tokenizer fit(const std::vector<std::string>& corpus_texts,
                       const std::vector<std::string>& forced_words = {},
                       int max_words = 512) {
    std::map<std::string, size_t> counts;
    for (const auto& text : corpus_texts)
      for (const auto& w : split(text, ' '))
        if (!w.empty()) counts[w]++;

    std::vector<std::string> vocab{"<eos>"};
    auto push_byte = [&](int b) {
      vocab.push_back(std::string(1, static_cast<char>(b)));
      vocab.push_back("##" + std::string(1, static_cast<char>(b)));
    };
    for (int b = 0x21; b <= 0x7E; ++b) push_byte(b);
    for (int b = 0x80; b <= 0xFF; ++b) push_byte(b);

    std::vector<std::string> words;
    auto add_word = [&](const std::string& w) {
      if (w.size() <= 1 || w.rfind("##", 0) == 0) return;  // would alias continuations
      if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
    };
    for (const auto& w : forced_words) add_word(w);
    std::vector<std::pair<std::string, size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (const auto& [w, c] : ranked) {
      if (static_cast<int>(words.size()) >= max_words) break;
      add_word(w);
    }
    for (auto& w : words) vocab.push_back(w);
    return from_vocab(std::move(vocab));
  }

  // Deterministic encoding; truncation keeps the prefix and the final id is
  // always <eos>.
  TokenSeq encode(std::string_view text, int max_len) const {
    if (text.empty()) throw DataError("tokenize: empty text");
    if (max_len < 2) throw DataError("tokenize: max length too small");
    TokenSeq seq;
    for (const auto& word : split(text, ' ')) {
      if (word.empty()) continue;
      size_t pos = 0;
      while (pos < word.size()) {
        const auto& lookup = pos == 0 ? init_lookup_ : cont_lookup_;
        const size_t cap = std::min(word.size() - pos, max_piece_len_);
        int best_id = -1;
        size_t best_len = 0;
        for (size_t len = cap; len >= 1; --len) {
          auto it = lookup.find(word.substr(pos, len));
          if (it != lookup.end()) {
            best_id = it->second;
            best_len = len;
            break;
          }
        }
        if (best_id < 0) {
          ++pos;  // unencodable byte (control char); skip
          continue;
        }
        seq.ids.push_back(best_id);
        pos += best_len;
      }
    }
    if (static_cast<int>(seq.ids.size()) >= max_len) seq.ids.resize(max_len - 1);
    seq.ids.push_back(kEos);
    return seq;
  }

  std::string decode(const TokenSeq& seq) const {
    std::string out;
    for (int id : seq.ids) {
      if (id == kEos) break;
      const std::string& piece = vocab_.at(id);
      if (piece.rfind("##", 0) == 0) {
        out += piece.substr(2);
      } else {
        if (!out.empty()) out.push_back(' ');
        out += piece;
      }
    }
    return out;
  }

  int vocab_size() const { return static_cast<int>(vocab_.size()); }
  const std::vector<std::string>& vocab() const { return vocab_; }

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> init_lookup_;
  std::unordered_map<std::string, int> cont_lookup_;
  size_t max_piece_len_ = 1;
};

}  // namespace camsig::nn
