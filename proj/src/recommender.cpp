#include "fleetline/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fleetline/error.hpp"

namespace fleetline::recommender {

namespace {

void check_k(int k) {
  if (k < 1) fail(ErrorCode::InvalidParam, "k_neighbors must be positive");
}

std::optional<double> distance_if_overlap(const std::map<VehicleId, double>& a,
                                          const std::map<VehicleId, double>& b) {
  double sum = 0.0;
  bool any = false;
  // Both maps are sorted by vehicle id: merge-walk the intersection.
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      const double d = ia->second - ib->second;
      sum += d * d;
      any = true;
      ++ia;
      ++ib;
    }
  }
  if (!any) return std::nullopt;
  return std::sqrt(sum);
}

}  // namespace

void RatingMatrix::set(const CustomerId& customer, const VehicleId& vehicle, double rating) {
  if (!(rating >= 1.0 && rating <= 5.0)) fail(ErrorCode::InvalidParam, "rating must lie in [1, 5]");
  auto [it, inserted] = by_customer_[customer].insert_or_assign(vehicle, rating);
  by_vehicle_[vehicle][customer] = rating;
  if (inserted) ++entries_;
}

std::optional<double> RatingMatrix::get(const CustomerId& customer, const VehicleId& vehicle) const {
  const auto* row = ratings_of(customer);
  if (!row) return std::nullopt;
  auto it = row->find(vehicle);
  if (it == row->end()) return std::nullopt;
  return it->second;
}

const std::map<VehicleId, double>* RatingMatrix::ratings_of(const CustomerId& customer) const {
  auto it = by_customer_.find(customer);
  return it == by_customer_.end() ? nullptr : &it->second;
}

const std::map<CustomerId, double>* RatingMatrix::raters_of(const VehicleId& vehicle) const {
  auto it = by_vehicle_.find(vehicle);
  return it == by_vehicle_.end() ? nullptr : &it->second;
}

double euclidean_distance(const CustomerId& u, const CustomerId& v, const RatingMatrix& m) {
  const auto* a = m.ratings_of(u);
  const auto* b = m.ratings_of(v);
  if (!a || !b) fail(ErrorCode::NoOverlap, "customer has no ratings");
  const auto d = distance_if_overlap(*a, *b);
  if (!d) fail(ErrorCode::NoOverlap, "customers " + u + " and " + v + " share no rated vehicle");
  return *d;
}

double similarity(const CustomerId& u, const CustomerId& v, const RatingMatrix& m) {
  return 1.0 / (1.0 + euclidean_distance(u, v, m));
}

RatingPredictor::RatingPredictor(const RatingMatrix& m, CustomerId customer, int k)
    : matrix_(m), customer_(std::move(customer)), k_(k) {
  check_k(k);
  const auto* mine = m.ratings_of(customer_);
  if (!mine) return;
  for (const auto& [other, row] : m.by_customer()) {
    if (other == customer_) continue;
    if (const auto d = distance_if_overlap(*mine, row)) similarity_.emplace(other, 1.0 / (1.0 + *d));
  }
}

double RatingPredictor::predict(const VehicleId& vehicle) const {
  const auto* raters = matrix_.raters_of(vehicle);
  if (!raters || raters->empty()) {
    fail(ErrorCode::ColdStart, "vehicle " + vehicle + " has no ratings");
  }

  struct Neighbor {
    double sim;
    const CustomerId* id;
    double rating;
  };
  std::vector<Neighbor> neighbors;
  for (const auto& [customer, rating] : *raters) {
    auto it = similarity_.find(customer);
    if (it != similarity_.end()) neighbors.push_back({it->second, &it->first, rating});
  }

  double prediction = 0.0;
  if (neighbors.empty()) {
    double sum = 0.0;
    for (const auto& [customer, rating] : *raters) sum += rating;
    prediction = sum / static_cast<double>(raters->size());
  } else {
    const auto take = std::min(neighbors.size(), static_cast<std::size_t>(k_));
    std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(take),
                      neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
                        if (a.sim != b.sim) return a.sim > b.sim;
                        return *a.id < *b.id;
                      });
    double weighted = 0.0;
    double weights = 0.0;
    for (std::size_t i = 0; i < take; ++i) {
      weighted += neighbors[i].sim * neighbors[i].rating;
      weights += neighbors[i].sim;
    }
    prediction = weighted / weights;
  }
  return std::clamp(prediction, 1.0, 5.0);
}

double predict_rating(const RatingMatrix& m, const CustomerId& customer, const VehicleId& vehicle, int k) {
  return RatingPredictor(m, customer, k).predict(vehicle);
}

RecommendationResult recommend(const RatingMatrix& m, const RecommendationQuery& q,
                               std::span<const FleetCandidate> fleet, const ScoreWeights& weights) {
  check_k(q.k_neighbors);
  std::vector<const FleetCandidate*> candidates;
  for (const auto& v : fleet) {
    if (!(v.cost_per_km > 0.0)) fail(ErrorCode::InvalidParam, "vehicle " + v.vehicle_id + " has non-positive cost");
    if (!v.available) continue;
    if (q.vehicle_type && v.vehicle_type != *q.vehicle_type) continue;
    if (q.max_cost_per_km && v.cost_per_km > *q.max_cost_per_km) continue;
    candidates.push_back(&v);
  }
  if (candidates.empty()) fail(ErrorCode::EmptyFleet, "no vehicle matches the query");

  const RatingPredictor predictor(m, q.customer_id, q.k_neighbors);
  RecommendationResult out;
  out.reserve(candidates.size());
  double min_cost = std::numeric_limits<double>::infinity();
  double max_cost = -min_cost;
  double min_dist = min_cost;
  double max_dist = -min_cost;
  for (const auto* v : candidates) {
    Recommendation r{v->vehicle_id, 0.0, std::nullopt, geo::haversine_km(q.location, v->location),
                     v->cost_per_km};
    try {
      r.predicted_rating = predictor.predict(v->vehicle_id);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ColdStart) throw;
    }
    min_cost = std::min(min_cost, r.cost_per_km);
    max_cost = std::max(max_cost, r.cost_per_km);
    min_dist = std::min(min_dist, r.distance_km);
    max_dist = std::max(max_dist, r.distance_km);
    out.push_back(std::move(r));
  }

  auto normalize = [](double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 0.0; };
  for (auto& r : out) {
    const double rating_term = r.predicted_rating ? (*r.predicted_rating - 1.0) / 4.0 : 0.5;
    r.score = weights.rating * rating_term +
              weights.cost * (1.0 - normalize(r.cost_per_km, min_cost, max_cost)) +
              weights.distance * (1.0 - normalize(r.distance_km, min_dist, max_dist));
  }
  std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.vehicle_id < b.vehicle_id;
  });
  return out;
}

}  // namespace fleetline::recommender
