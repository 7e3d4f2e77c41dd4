#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fleetline::reviews {

inline constexpr std::size_t kMaxReviewLength = 2000;

struct Review {
  std::string review_id;
  std::string customer_id;
  std::string provider_id;
  std::string trip_id;
  std::string text;
  int stars = 0;
  std::int64_t created_at = 0;
};

// Throws Error{InvalidParam} unless stars is 1..5 and text fits the limit.
void validate(const Review& review);

using WordSet = std::set<std::string, std::less<>>;

struct SentimentLexicon {
  WordSet positive;
  WordSet negative;
};

// The six positive and six negative keywords of the canonical dataset.
const SentimentLexicon& default_lexicon();
const WordSet& default_stoplist();

struct LexiconFile {
  SentimentLexicon lexicon;
  WordSet stopwords;
};

// Plain text, one word per line under "[positive]", "[negative]" or
// "[stopwords]" headers; blank lines and '#' comments ignored. Words are
// lowercased. Throws Error{ValidationError} on words outside a section or a
// word listed as both positive and negative.
LexiconFile parse_lexicon(std::istream& in);

enum class SentimentLabel { Positive, Negative, Neutral };

std::string_view to_string(SentimentLabel label) noexcept;

// Lowercase, split on runs of non-alphanumeric ASCII, drop stop words.
std::vector<std::string> tokenize_remove_stopwords(std::string_view text,
                                                   const WordSet& stoplist = default_stoplist());

SentimentLabel classify_review(std::string_view text, const SentimentLexicon& lexicon = default_lexicon(),
                               const WordSet& stoplist = default_stoplist());

struct SentimentCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t neutral = 0;

  friend bool operator==(const SentimentCounts&, const SentimentCounts&) = default;
};

SentimentCounts sentiment_counts(std::span<const Review> reviews,
                                 const SentimentLexicon& lexicon = default_lexicon(),
                                 const WordSet& stoplist = default_stoplist());

struct ProviderRank {
  std::string provider_id;
  std::optional<double> mean_stars;  // absent for providers without reviews
  std::size_t review_count = 0;
};

// Mean stars desc, review count desc, provider id asc; providers listed in
// `known_providers` without reviews go last in id order.
std::vector<ProviderRank> rank_providers(std::span<const Review> reviews,
                                         std::span<const std::string> known_providers = {});

struct SpamPolicy {
  std::size_t min_reviews = 5;
  double dup_ratio_threshold = 0.5;
  std::size_t same_customer_burst = 3;
  std::int64_t burst_window_ms = 86'400'000;
};

// Throws Error{InvalidParam} for non-positive thresholds.
void validate(const SpamPolicy& policy);

enum class SpamReason { DuplicateRatio, CustomerBurst };

std::string_view to_string(SpamReason reason) noexcept;

struct SpamFlag {
  std::string provider_id;
  std::vector<SpamReason> reasons;
  double duplicate_ratio = 0.0;
};

// Providers with at least min_reviews reviews are flagged when
//   1 - distinct/total normalized texts >= dup_ratio_threshold, or
//   one customer wrote >= same_customer_burst of them within burst_window_ms.
// Normalized text is the token list joined by single spaces. Sorted by id.
std::vector<SpamFlag> detect_spam_providers(std::span<const Review> reviews, const SpamPolicy& policy = {});

}  // namespace fleetline::reviews
