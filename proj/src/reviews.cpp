#include "fleetline/reviews.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_set>

#include "fleetline/error.hpp"

namespace fleetline::reviews {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalized_text(std::string_view text) {
  std::string out;
  for (const auto& token : tokenize_remove_stopwords(text)) {
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

}  // namespace

void validate(const Review& review) {
  if (review.stars < 1 || review.stars > 5) fail(ErrorCode::InvalidParam, "stars must be 1..5");
  if (review.text.size() > kMaxReviewLength) {
    fail(ErrorCode::InvalidParam, "review text exceeds 2000 characters");
  }
}

const SentimentLexicon& default_lexicon() {
  static const SentimentLexicon lexicon{
      {"good", "great", "happy", "active", "nice", "believe"},
      {"sad", "bad", "poor", "useless", "cold", "cry"},
  };
  return lexicon;
}

const WordSet& default_stoplist() {
  static const WordSet stoplist{"a",  "an", "the", "is",   "was", "are",  "were", "and", "or", "but",
                                "to", "of", "in",  "on",   "for", "with", "it",   "this", "that"};
  return stoplist;
}

LexiconFile parse_lexicon(std::istream& in) {
  LexiconFile out;
  WordSet* section = nullptr;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string word = lowercase(std::string_view(line).substr(first, last - first + 1));
    if (word == "[positive]") {
      section = &out.lexicon.positive;
    } else if (word == "[negative]") {
      section = &out.lexicon.negative;
    } else if (word == "[stopwords]") {
      section = &out.stopwords;
    } else if (!section) {
      fail(ErrorCode::ValidationError, "line " + std::to_string(line_no) + ": word outside a section");
    } else {
      section->insert(word);
    }
  }
  for (const auto& w : out.lexicon.positive) {
    if (out.lexicon.negative.contains(w)) {
      fail(ErrorCode::ValidationError, "word '" + w + "' is both positive and negative");
    }
  }
  return out;
}

std::string_view to_string(SentimentLabel label) noexcept {
  switch (label) {
    case SentimentLabel::Positive: return "positive";
    case SentimentLabel::Negative: return "negative";
    case SentimentLabel::Neutral: return "neutral";
  }
  return "neutral";
}

std::vector<std::string> tokenize_remove_stopwords(std::string_view text, const WordSet& stoplist) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stoplist.contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (uc < 0x80 && std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

SentimentLabel classify_review(std::string_view text, const SentimentLexicon& lexicon, const WordSet& stoplist) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& token : tokenize_remove_stopwords(text, stoplist)) {
    if (lexicon.positive.contains(token)) ++pos;
    if (lexicon.negative.contains(token)) ++neg;
  }
  if (pos > neg) return SentimentLabel::Positive;
  if (neg > pos) return SentimentLabel::Negative;
  return SentimentLabel::Neutral;
}

SentimentCounts sentiment_counts(std::span<const Review> reviews, const SentimentLexicon& lexicon,
                                 const WordSet& stoplist) {
  SentimentCounts counts;
  for (const auto& r : reviews) {
    switch (classify_review(r.text, lexicon, stoplist)) {
      case SentimentLabel::Positive: ++counts.positive; break;
      case SentimentLabel::Negative: ++counts.negative; break;
      case SentimentLabel::Neutral: ++counts.neutral; break;
    }
  }
  return counts;
}

std::vector<ProviderRank> rank_providers(std::span<const Review> reviews,
                                         std::span<const std::string> known_providers) {
  std::map<std::string, std::pair<long long, std::size_t>> totals;  // star sum, count
  for (const auto& id : known_providers) totals.try_emplace(id, 0, 0);
  for (const auto& r : reviews) {
    auto& t = totals[r.provider_id];
    t.first += r.stars;
    ++t.second;
  }

  std::vector<ProviderRank> ranked;
  ranked.reserve(totals.size());
  for (const auto& [id, t] : totals) {
    ProviderRank rank{id, std::nullopt, t.second};
    if (t.second > 0) rank.mean_stars = static_cast<double>(t.first) / static_cast<double>(t.second);
    ranked.push_back(std::move(rank));
  }
  std::sort(ranked.begin(), ranked.end(), [](const ProviderRank& a, const ProviderRank& b) {
    if (a.mean_stars.has_value() != b.mean_stars.has_value()) return a.mean_stars.has_value();
    if (a.mean_stars && *a.mean_stars != *b.mean_stars) return *a.mean_stars > *b.mean_stars;
    if (a.review_count != b.review_count) return a.review_count > b.review_count;
    return a.provider_id < b.provider_id;
  });
  return ranked;
}

void validate(const SpamPolicy& policy) {
  if (policy.min_reviews == 0 || policy.same_customer_burst == 0 || policy.burst_window_ms <= 0 ||
      !(policy.dup_ratio_threshold > 0.0 && policy.dup_ratio_threshold <= 1.0)) {
    fail(ErrorCode::InvalidParam, "spam policy thresholds must be positive, dup ratio in (0, 1]");
  }
}

std::string_view to_string(SpamReason reason) noexcept {
  switch (reason) {
    case SpamReason::DuplicateRatio: return "duplicate-ratio";
    case SpamReason::CustomerBurst: return "customer-burst";
  }
  return "unknown";
}

std::vector<SpamFlag> detect_spam_providers(std::span<const Review> reviews, const SpamPolicy& policy) {
  validate(policy);
  std::map<std::string, std::vector<const Review*>> by_provider;
  for (const auto& r : reviews) by_provider[r.provider_id].push_back(&r);

  std::vector<SpamFlag> flags;
  for (const auto& [provider, list] : by_provider) {
    if (list.size() < policy.min_reviews) continue;
    SpamFlag flag{provider, {}, 0.0};

    std::unordered_set<std::string> distinct;
    for (const auto* r : list) distinct.insert(normalized_text(r->text));
    flag.duplicate_ratio =
        1.0 - static_cast<double>(distinct.size()) / static_cast<double>(list.size());
    if (flag.duplicate_ratio >= policy.dup_ratio_threshold) flag.reasons.push_back(SpamReason::DuplicateRatio);

    std::map<std::string, std::vector<std::int64_t>> times;
    for (const auto* r : list) times[r->customer_id].push_back(r->created_at);
    const std::size_t burst = policy.same_customer_burst;
    const bool burst_found = std::any_of(times.begin(), times.end(), [&](auto& entry) {
      auto& ts = entry.second;
      std::sort(ts.begin(), ts.end());
      for (std::size_t i = 0; i + burst <= ts.size(); ++i) {
        if (ts[i + burst - 1] - ts[i] <= policy.burst_window_ms) return true;
      }
      return false;
    });
    if (burst_found) flag.reasons.push_back(SpamReason::CustomerBurst);

    if (!flag.reasons.empty()) flags.push_back(std::move(flag));
  }
  return flags;
}

}  // namespace fleetline::reviews
