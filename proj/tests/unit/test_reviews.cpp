#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fleetline/error.hpp"
#include "fleetline/reviews.hpp"
#include "test_support.hpp"

using namespace fleetline;
using namespace fleetline::reviews;

namespace {

Review make(std::string provider, std::string customer, std::string text, int stars = 4, std::int64_t at = 0) {
  static int counter = 0;
  ++counter;
  return Review{"R" + std::to_string(counter), std::move(customer), std::move(provider),
                "T" + std::to_string(counter), std::move(text), stars, at};
}

constexpr std::int64_t kHour = 3'600'000;
constexpr std::int64_t kDay = 24 * kHour;

}  // namespace

TEST_CASE("lexicon and stoplist defaults") {
  const auto& lex = default_lexicon();
  CHECK(lex.positive == WordSet{"good", "great", "happy", "active", "nice", "believe"});
  CHECK(lex.negative == WordSet{"sad", "bad", "poor", "useless", "cold", "cry"});
  CHECK(default_stoplist().size() == 19);
  for (const auto& w : lex.positive) CHECK_FALSE(lex.negative.contains(w));
}

TEST_CASE("tokenize_remove_stopwords examples") {
  using V = std::vector<std::string>;
  CHECK(tokenize_remove_stopwords("") == V{});
  CHECK(tokenize_remove_stopwords("The driver is good") == V{"driver", "good"});
  CHECK(tokenize_remove_stopwords("AND THE OR") == V{});
  CHECK(tokenize_remove_stopwords("  on-time!!delivery, 2nd try ") == V{"time", "delivery", "2nd", "try"});
}

TEST_CASE("classify_review examples") {
  CHECK(classify_review("Good driver") == SentimentLabel::Positive);
  CHECK(classify_review("bad and poor service") == SentimentLabel::Negative);
  CHECK(classify_review("nice but cold") == SentimentLabel::Neutral);
  CHECK(classify_review("") == SentimentLabel::Neutral);
  CHECK(classify_review("goodness") == SentimentLabel::Neutral);  // exact tokens only
}

TEST_CASE("classification ignores case and inserted stop words") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> words{"good", "bad", "nice", "cold", "truck", "late", "happy", "cry", "poor", "fine"};
  const std::vector<std::string> stops(default_stoplist().begin(), default_stoplist().end());
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    std::string noisy;
    const int n = static_cast<int>(rng() % 7);
    for (int i = 0; i < n; ++i) {
      const auto& w = words[rng() % words.size()];
      text += w + " ";
      std::string upper = w;
      for (auto& ch : upper) {
        if (rng() % 2) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      }
      noisy += stops[rng() % stops.size()] + " " + upper + ", ";
    }
    CHECK(classify_review(text) == classify_review(noisy));
  }
}

TEST_CASE("sentiment counts total and permutation invariance") {
  CHECK(sentiment_counts({}) == SentimentCounts{});
  std::vector<Review> rs{make("P1", "C1", "good"), make("P1", "C2", "bad truck"), make("P1", "C3", "meh"),
                         make("P2", "C1", "happy happy sad"), make("P2", "C4", "useless")};
  const auto counts = sentiment_counts(rs);
  CHECK(counts == SentimentCounts{2, 2, 1});
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(rs.begin(), rs.end(), rng);
    CHECK(sentiment_counts(rs) == counts);
  }
}

TEST_CASE("figure-style scenario counts one keyword per review") {
  const auto& lex = default_lexicon();
  const std::vector<std::string> pos(lex.positive.begin(), lex.positive.end());
  const std::vector<std::string> neg(lex.negative.begin(), lex.negative.end());
  std::vector<Review> rs;
  for (int i = 0; i < 50; ++i) rs.push_back(make("P1", "C1", "The driver was " + pos[i % pos.size()]));
  for (int i = 0; i < 30; ++i) rs.push_back(make("P1", "C1", "Delivery was " + neg[i % neg.size()]));
  CHECK(sentiment_counts(rs) == SentimentCounts{50, 30, 0});
}

TEST_CASE("parse_lexicon") {
  std::istringstream in(
      "# custom\n[positive]\nSwift\nkind\n\n[negative]\nlate\n[stopwords]\nvery\n");
  const auto file = parse_lexicon(in);
  CHECK(file.lexicon.positive == WordSet{"swift", "kind"});
  CHECK(file.lexicon.negative == WordSet{"late"});
  CHECK(file.stopwords == WordSet{"very"});
  CHECK(classify_review("very swift", file.lexicon, file.stopwords) == SentimentLabel::Positive);

  std::istringstream orphan("word\n");
  CHECK_THROWS_CODE(parse_lexicon(orphan), ErrorCode::ValidationError);
  std::istringstream both("[positive]\nx\n[negative]\nx\n");
  CHECK_THROWS_CODE(parse_lexicon(both), ErrorCode::ValidationError);
}

TEST_CASE("review validation") {
  CHECK_NOTHROW(validate(make("P", "C", "ok", 1)));
  CHECK_THROWS_CODE(validate(make("P", "C", "ok", 0)), ErrorCode::InvalidParam);
  CHECK_THROWS_CODE(validate(make("P", "C", "ok", 6)), ErrorCode::InvalidParam);
  CHECK_NOTHROW(validate(make("P", "C", std::string(2000, 'x'))));
  CHECK_THROWS_CODE(validate(make("P", "C", std::string(2001, 'x'))), ErrorCode::InvalidParam);
}

TEST_CASE("rank_providers examples") {
  SUBCASE("single provider") {
    const std::vector<Review> rs{make("P", "C1", "", 4), make("P", "C2", "", 5)};
    const auto r = rank_providers(rs);
    REQUIRE(r.size() == 1);
    CHECK(r[0].provider_id == "P");
    CHECK(r[0].mean_stars == 4.5);
    CHECK(r[0].review_count == 2);
  }
  SUBCASE("equal mean, more reviews first; unreviewed last") {
    std::vector<Review> rs;
    for (int i = 0; i < 2; ++i) rs.push_back(make("A", "C", "", 4));
    for (int i = 0; i < 10; ++i) rs.push_back(make("B", "C", "", 4));
    const std::vector<std::string> known{"Z0", "A", "B", "A0"};
    const auto r = rank_providers(rs, known);
    REQUIRE(r.size() == 4);
    CHECK(r[0].provider_id == "B");
    CHECK(r[1].provider_id == "A");
    CHECK(r[2].provider_id == "A0");
    CHECK_FALSE(r[2].mean_stars);
    CHECK(r[3].provider_id == "Z0");
  }
}

TEST_CASE("rank_providers matches a brute-force comparator") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Review> rs;
    const int n = static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      rs.push_back(make("P" + std::to_string(rng() % 5), "C", "", 1 + static_cast<int>(rng() % 5)));
    }
    const auto got = rank_providers(rs);
    // Oracle: integer star sums compared by cross-multiplication.
    struct Agg {
      std::string id;
      long sum = 0;
      long count = 0;
    };
    std::vector<Agg> agg;
    for (const auto& r : rs) {
      auto it = std::find_if(agg.begin(), agg.end(), [&](const Agg& a) { return a.id == r.provider_id; });
      if (it == agg.end()) {
        agg.push_back({r.provider_id});
        it = agg.end() - 1;
      }
      it->sum += r.stars;
      it->count += 1;
    }
    std::sort(agg.begin(), agg.end(), [](const Agg& a, const Agg& b) {
      if (a.sum * b.count != b.sum * a.count) return a.sum * b.count > b.sum * a.count;
      if (a.count != b.count) return a.count > b.count;
      return a.id < b.id;
    });
    REQUIRE(got.size() == agg.size());
    for (std::size_t i = 0; i < agg.size(); ++i) {
      CHECK(got[i].provider_id == agg[i].id);
      CHECK(got[i].review_count == static_cast<std::size_t>(agg[i].count));
    }
  }
}

TEST_CASE("spam detection examples") {
  SUBCASE("below the review minimum is never flagged") {
    std::vector<Review> rs;
    for (int i = 0; i < 4; ++i) rs.push_back(make("P", "C1", "same text", 5, i));
    CHECK(detect_spam_providers(rs).empty());
  }
  SUBCASE("five of six identical normalized texts") {
    std::vector<Review> rs;
    const char* variants[] = {"Great truck!", "great TRUCK", "GREAT, truck.", "great truck", "the great truck"};
    for (int i = 0; i < 5; ++i) rs.push_back(make("P", "C" + std::to_string(i), variants[i], 5, i * kDay));
    rs.push_back(make("P", "C9", "late but fine", 3, 9 * kDay));
    const auto flags = detect_spam_providers(rs);
    REQUIRE(flags.size() == 1);
    CHECK(flags[0].provider_id == "P");
    CHECK(flags[0].reasons == std::vector<SpamReason>{SpamReason::DuplicateRatio});
    CHECK(flags[0].duplicate_ratio == doctest::Approx(1.0 - 2.0 / 6.0));
  }
  SUBCASE("distinct customers and texts over a week") {
    std::vector<Review> rs;
    for (int i = 0; i < 5; ++i) {
      rs.push_back(make("P", "C" + std::to_string(i), "review number " + std::to_string(i), 4, i * 36 * kHour));
    }
    CHECK(detect_spam_providers(rs).empty());
  }
  SUBCASE("customer burst inside the window") {
    std::vector<Review> rs;
    for (int i = 0; i < 3; ++i) rs.push_back(make("P", "C1", "text " + std::to_string(i), 5, i * 8 * kHour));
    rs.push_back(make("P", "C2", "other one", 5, 0));
    rs.push_back(make("P", "C3", "other two", 5, 0));
    auto flags = detect_spam_providers(rs);
    REQUIRE(flags.size() == 1);
    CHECK(flags[0].reasons == std::vector<SpamReason>{SpamReason::CustomerBurst});

    // Stretch the burst past the window.
    for (auto& r : rs) {
      if (r.customer_id == "C1") r.created_at *= 2;
    }
    CHECK(detect_spam_providers(rs).empty());
  }
  SUBCASE("policy validation") {
    SpamPolicy p;
    p.dup_ratio_threshold = 0.0;
    CHECK_THROWS_CODE(validate(p), ErrorCode::InvalidParam);
    p.dup_ratio_threshold = 1.5;
    CHECK_THROWS_CODE(validate(p), ErrorCode::InvalidParam);
  }
}

TEST_CASE("lowering the duplicate threshold never unflags a provider") {
  std::mt19937_64 rng(31);
  const std::vector<std::string> texts{"good", "good!", "bad", "ok", "fine truck", "GOOD"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Review> rs;
    for (int i = 0; i < 40; ++i) {
      rs.push_back(make("P" + std::to_string(rng() % 4), "C" + std::to_string(rng() % 10),
                        texts[rng() % texts.size()], 3, static_cast<std::int64_t>(rng() % (10 * kDay))));
    }
    auto flagged = [&](double threshold) {
      SpamPolicy p;
      p.dup_ratio_threshold = threshold;
      std::vector<std::string> ids;
      for (const auto& f : detect_spam_providers(rs, p)) ids.push_back(f.provider_id);
      return ids;
    };
    std::vector<std::string> previous;
    for (double t : {1.0, 0.9, 0.75, 0.5, 0.3, 0.1}) {
      const auto now = flagged(t);
      CHECK(std::includes(now.begin(), now.end(), previous.begin(), previous.end()));
      previous = now;
    }
  }
}
