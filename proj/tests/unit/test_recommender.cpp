#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "fleetline/error.hpp"
#include "fleetline/recommender.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace fleetline;
using namespace fleetline::recommender;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string cid(std::size_t i) { return "C" + std::to_string(100 + i); }
std::string vid(std::size_t i) { return "V" + std::to_string(100 + i); }

// Random sparse matrix in both representations. Ratings are half-stars so
// equal similarities happen often enough to exercise the tie-break.
std::pair<RatingMatrix, oracle::DenseRatings> random_matrix(std::mt19937_64& rng, std::size_t customers,
                                                            std::size_t vehicles, double density) {
  RatingMatrix m;
  oracle::DenseRatings d;
  std::bernoulli_distribution present(density);
  std::uniform_int_distribution<int> half_stars(2, 10);
  for (std::size_t c = 0; c < customers; ++c) d.customers.push_back(cid(c));
  for (std::size_t v = 0; v < vehicles; ++v) d.vehicles.push_back(vid(v));
  d.ratings.assign(customers, std::vector<double>(vehicles, kNaN));
  for (std::size_t c = 0; c < customers; ++c) {
    for (std::size_t v = 0; v < vehicles; ++v) {
      if (!present(rng)) continue;
      const double r = half_stars(rng) / 2.0;
      m.set(cid(c), vid(v), r);
      d.ratings[c][v] = r;
    }
  }
  return {std::move(m), std::move(d)};
}

}  // namespace

TEST_CASE("rating matrix keeps one rating per pair") {
  RatingMatrix m;
  m.set("C1", "V1", 2.0);
  m.set("C1", "V1", 4.5);
  CHECK(m.size() == 1);
  CHECK(*m.get("C1", "V1") == 4.5);
  CHECK(m.raters_of("V1")->at("C1") == 4.5);
  CHECK_FALSE(m.get("C1", "V2"));
  CHECK_THROWS_CODE(m.set("C1", "V1", 0.99), ErrorCode::InvalidParam);
  CHECK_THROWS_CODE(m.set("C1", "V1", 5.01), ErrorCode::InvalidParam);
  CHECK_THROWS_CODE(m.set("C1", "V1", kNaN), ErrorCode::InvalidParam);
}

TEST_CASE("euclidean distance over co-rated vehicles") {
  RatingMatrix m;
  m.set("u", "a", 1);
  m.set("u", "b", 2);
  m.set("v", "a", 4);
  m.set("v", "b", 5);
  m.set("v", "c", 1);  // not co-rated, must not count
  m.set("w", "a", 1);
  m.set("w", "b", 2);
  m.set("x", "z", 3);

  CHECK(euclidean_distance("u", "v", m) == doctest::Approx(4.242640687119285).epsilon(1e-12));
  CHECK(std::abs(euclidean_distance("u", "v", m) - std::sqrt(18.0)) < 1e-9);
  CHECK(euclidean_distance("u", "w", m) == 0.0);
  CHECK(euclidean_distance("v", "u", m) == euclidean_distance("u", "v", m));
  CHECK_THROWS_CODE(euclidean_distance("u", "x", m), ErrorCode::NoOverlap);
  CHECK_THROWS_CODE(euclidean_distance("u", "nobody", m), ErrorCode::NoOverlap);

  CHECK(similarity("u", "w", m) == 1.0);
  // 1 / (1 + sqrt(18)) = 0.1907436...
  CHECK(std::abs(similarity("u", "v", m) - 1.0 / (1.0 + std::sqrt(18.0))) < 1e-12);
  CHECK(std::abs(similarity("u", "v", m) - 0.190744) < 1e-6);
  CHECK_THROWS_CODE(similarity("u", "x", m), ErrorCode::NoOverlap);
}

TEST_CASE("similarity stays in (0, 1] even for maximal distance") {
  RatingMatrix m;
  for (int i = 0; i < 200; ++i) {
    m.set("lo", vid(i), 1.0);
    m.set("hi", vid(i), 5.0);
  }
  const double s = similarity("lo", "hi", m);
  CHECK(s > 0.0);
  CHECK(s < 0.02);
}

TEST_CASE("triangle inequality when all pairs share the same co-rated set") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> r(1.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    RatingMatrix m;
    for (int v = 0; v < 4; ++v) {
      m.set("a", vid(v), r(rng));
      m.set("b", vid(v), r(rng));
      m.set("c", vid(v), r(rng));
    }
    const double ab = euclidean_distance("a", "b", m);
    const double bc = euclidean_distance("b", "c", m);
    const double ac = euclidean_distance("a", "c", m);
    CHECK(ac <= ab + bc + 1e-12);
  }
}

TEST_CASE("predict_rating worked examples") {
  SUBCASE("one neighbor") {
    RatingMatrix m;
    m.set("me", "shared", 3);
    m.set("n1", "shared", 2);
    m.set("n1", "target", 4);
    CHECK(predict_rating(m, "me", "target") == 4.0);
  }
  SUBCASE("two equally similar neighbors average") {
    RatingMatrix m;
    m.set("me", "shared", 3);
    m.set("n1", "shared", 2);
    m.set("n2", "shared", 4);
    m.set("n1", "target", 2);
    m.set("n2", "target", 4);
    CHECK(predict_rating(m, "me", "target") == doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("tie at the k-th neighbor admits the lower customer id") {
    RatingMatrix m;
    m.set("me", "shared", 3);
    m.set("b", "shared", 2);
    m.set("a", "shared", 4);
    m.set("a", "target", 5);
    m.set("b", "target", 1);
    CHECK(predict_rating(m, "me", "target", 1) == 5.0);
  }
  SUBCASE("no comparable neighbor falls back to the vehicle mean") {
    RatingMatrix m;
    m.set("me", "other", 3);
    m.set("x", "target", 2);
    m.set("y", "target", 5);
    CHECK(predict_rating(m, "me", "target") == 3.5);
  }
  SUBCASE("unrated vehicle is a cold start") {
    RatingMatrix m;
    m.set("me", "other", 3);
    CHECK_THROWS_CODE(predict_rating(m, "me", "target"), ErrorCode::ColdStart);
  }
  SUBCASE("k must be positive") {
    RatingMatrix m;
    m.set("me", "target", 3);
    CHECK_THROWS_CODE(predict_rating(m, "me", "target", 0), ErrorCode::InvalidParam);
  }
}

TEST_CASE("predict_rating matches the dense brute-force oracle") {
  std::mt19937_64 rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t nc = 2 + trial % 7;
    const std::size_t nv = 2 + (trial / 7) % 6;
    auto [m, d] = random_matrix(rng, nc, nv, trial % 3 == 0 ? 0.3 : 0.6);
    for (int k = 1; k <= 4; ++k) {
      for (std::size_t c = 0; c < nc; ++c) {
        const RatingPredictor predictor(m, cid(c), k);
        for (std::size_t v = 0; v < nv; ++v) {
          const auto expected = oracle::dense_predict(d, c, v, k);
          if (!expected) {
            CHECK_THROWS_CODE(predict_rating(m, cid(c), vid(v), k), ErrorCode::ColdStart);
            CHECK_THROWS_CODE(predictor.predict(vid(v)), ErrorCode::ColdStart);
            continue;
          }
          const double got = predict_rating(m, cid(c), vid(v), k);
          CHECK(std::abs(got - *expected) < 1e-9);
          CHECK(std::abs(predictor.predict(vid(v)) - got) < 1e-12);
          CHECK(got >= 1.0);
          CHECK(got <= 5.0);
          ++compared;
        }
      }
    }
  }
  CHECK(compared > 5000);
}

namespace {

// Straight transcription of the scoring rule with its own normalization.
std::vector<std::pair<std::string, double>> score_oracle(const oracle::DenseRatings& d, std::size_t customer,
                                                         const geo::GeoPoint& at,
                                                         const std::vector<FleetCandidate>& fleet, int k) {
  std::vector<double> cost;
  std::vector<double> dist;
  std::vector<double> rating_term;
  for (const auto& v : fleet) {
    cost.push_back(v.cost_per_km);
    dist.push_back(oracle::great_circle_km(at.lat(), at.lon(), v.location.lat(), v.location.lon()));
    std::size_t column = 0;
    while (d.vehicles[column] != v.vehicle_id) ++column;
    const auto p = oracle::dense_predict(d, customer, column, k);
    rating_term.push_back(p ? (*p - 1.0) / 4.0 : 0.5);
  }
  auto norm = [](const std::vector<double>& xs, std::size_t i) {
    const double lo = *std::min_element(xs.begin(), xs.end());
    const double hi = *std::max_element(xs.begin(), xs.end());
    return hi == lo ? 0.0 : (xs[i] - lo) / (hi - lo);
  };
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    out.emplace_back(fleet[i].vehicle_id,
                     0.5 * rating_term[i] + 0.25 * (1.0 - norm(cost, i)) + 0.25 * (1.0 - norm(dist, i)));
  }
  return out;
}

}  // namespace

TEST_CASE("recommend ranking equals the brute-force scoring oracle") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> lat(40.0, 41.0);
  std::uniform_real_distribution<double> lon(-74.5, -73.5);
  std::uniform_int_distribution<int> cents(100, 900);
  for (int trial = 0; trial < 200; ++trial) {
    auto [m, d] = random_matrix(rng, 4, 6, 0.6);
    std::vector<FleetCandidate> fleet;
    for (std::size_t v = 0; v < 6; ++v) {
      fleet.push_back({vid(v), "van", geo::GeoPoint(lat(rng), lon(rng)), cents(rng) / 100.0, true});
    }
    const std::size_t customer = static_cast<std::size_t>(trial % 4);
    const geo::GeoPoint at(lat(rng), lon(rng));
    const auto result = recommend(m, {cid(customer), at, std::nullopt, std::nullopt, 3}, fleet);
    auto expected = score_oracle(d, customer, at, fleet, 3);

    REQUIRE(result.size() == expected.size());
    for (std::size_t i = 0; i + 1 < result.size(); ++i) {
      CHECK(result[i].score >= result[i + 1].score);
    }
    for (const auto& r : result) {
      const auto it = std::find_if(expected.begin(), expected.end(), [&](auto& e) { return e.first == r.vehicle_id; });
      REQUIRE(it != expected.end());
      CHECK(std::abs(it->second - r.score) < 1e-9);
      CHECK(r.score >= 0.0);
      CHECK(r.score <= 1.0);
    }
  }
}

TEST_CASE("recommend filters and edge cases") {
  RatingMatrix m;
  m.set("C1", "V1", 4);
  const geo::GeoPoint here(40.0, -74.0);

  SUBCASE("single candidate scores with zero norms") {
    const std::vector<FleetCandidate> fleet{{"V1", "van", geo::GeoPoint(40.1, -74.0), 3.0, true}};
    const auto r = recommend(m, {"C1", here, std::nullopt, std::nullopt, 3}, fleet);
    REQUIRE(r.size() == 1);
    // Only rater is the customer: fallback to the vehicle mean 4.
    CHECK(r[0].predicted_rating == 4.0);
    CHECK(r[0].score == doctest::Approx(0.5 * 0.75 + 0.25 + 0.25));
  }
  SUBCASE("cheaper of two otherwise identical vehicles ranks first") {
    const std::vector<FleetCandidate> fleet{{"V1", "van", here, 5.0, true}, {"V2", "van", here, 2.0, true}};
    RatingMatrix empty;
    const auto r = recommend(empty, {"C1", here, std::nullopt, std::nullopt, 3}, fleet);
    REQUIRE(r.size() == 2);
    CHECK(r[0].vehicle_id == "V2");
    CHECK_FALSE(r[0].predicted_rating);
  }
  SUBCASE("equal scores break ties by vehicle id") {
    const std::vector<FleetCandidate> fleet{{"V9", "van", here, 2.0, true}, {"V3", "van", here, 2.0, true}};
    RatingMatrix empty;
    const auto r = recommend(empty, {"C1", here, std::nullopt, std::nullopt, 3}, fleet);
    CHECK(r[0].vehicle_id == "V3");
    CHECK(r[1].vehicle_id == "V9");
  }
  SUBCASE("availability, type and cost ceiling filter") {
    const std::vector<FleetCandidate> fleet{{"V1", "van", here, 2.0, false},
                                            {"V2", "truck-small", here, 2.0, true},
                                            {"V3", "van", here, 9.0, true},
                                            {"V4", "van", here, 3.0, true}};
    const auto r = recommend(m, {"C1", here, 5.0, std::string("van"), 3}, fleet);
    REQUIRE(r.size() == 1);
    CHECK(r[0].vehicle_id == "V4");
    CHECK_THROWS_CODE(recommend(m, {"C1", here, 1.0, std::nullopt, 3}, fleet), ErrorCode::EmptyFleet);
  }
  SUBCASE("empty fleet") {
    CHECK_THROWS_CODE(recommend(m, {"C1", here, std::nullopt, std::nullopt, 3}, {}), ErrorCode::EmptyFleet);
  }
  SUBCASE("wrong geographical position in the query") {
    CHECK_THROWS_CODE((RecommendationQuery{"C1", geo::GeoPoint(95.0, 0.0), std::nullopt, std::nullopt, 3}), ErrorCode::InvalidLocation);
  }
  SUBCASE("non-positive cost is rejected") {
    const std::vector<FleetCandidate> fleet{{"V1", "van", here, 0.0, true}};
    CHECK_THROWS_CODE(recommend(m, {"C1", here, std::nullopt, std::nullopt, 3}, fleet), ErrorCode::InvalidParam);
  }
}

TEST_CASE("ranking is invariant under uniform cost scaling and deterministic") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lat(40.0, 41.0);
  std::uniform_real_distribution<double> lon(-74.5, -73.5);
  std::uniform_real_distribution<double> cost(1.0, 9.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto [m, d] = random_matrix(rng, 5, 8, 0.5);
    std::vector<FleetCandidate> fleet;
    for (std::size_t v = 0; v < 8; ++v) fleet.push_back({vid(v), "van", geo::GeoPoint(lat(rng), lon(rng)), cost(rng), true});
    const RecommendationQuery q{cid(0), geo::GeoPoint(lat(rng), lon(rng)), std::nullopt, std::nullopt, 3};
    auto order = [&](const std::vector<FleetCandidate>& f) {
      std::vector<std::string> ids;
      for (const auto& r : recommend(m, q, f)) ids.push_back(r.vehicle_id);
      return ids;
    };
    const auto base = order(fleet);
    CHECK(order(fleet) == base);
    for (double factor : {0.25, 2.0, 10.0, 1000.0}) {
      auto scaled = fleet;
      for (auto& v : scaled) v.cost_per_km *= factor;
      CHECK(order(scaled) == base);
    }
  }
}
