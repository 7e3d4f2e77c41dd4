#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fleetline/geo.hpp"

namespace fleetline::recommender {

using CustomerId = std::string;
using VehicleId = std::string;

// Sparse customer x vehicle star ratings in [1, 5]. One rating per pair;
// a later set() replaces the earlier value.
class RatingMatrix {
 public:
  // Throws Error{InvalidParam} for ratings outside [1, 5].
  void set(const CustomerId& customer, const VehicleId& vehicle, double rating);

  std::optional<double> get(const CustomerId& customer, const VehicleId& vehicle) const;
  bool has_customer(const CustomerId& customer) const { return by_customer_.contains(customer); }

  const std::map<VehicleId, double>* ratings_of(const CustomerId& customer) const;
  const std::map<CustomerId, double>* raters_of(const VehicleId& vehicle) const;

  const std::map<CustomerId, std::map<VehicleId, double>>& by_customer() const { return by_customer_; }
  std::size_t size() const noexcept { return entries_; }

 private:
  std::map<CustomerId, std::map<VehicleId, double>> by_customer_;
  std::map<VehicleId, std::map<CustomerId, double>> by_vehicle_;
  std::size_t entries_ = 0;
};

// Square root of the summed squared differences over co-rated vehicles.
// Throws Error{NoOverlap} if the two customers share no rated vehicle.
double euclidean_distance(const CustomerId& u, const CustomerId& v, const RatingMatrix& m);

// 1 / (1 + euclidean_distance). Propagates NoOverlap.
double similarity(const CustomerId& u, const CustomerId& v, const RatingMatrix& m);

inline constexpr int kDefaultNeighbors = 3;

// Similarity-weighted mean of the vehicle's ratings among the k most similar
// customers who rated it (ties by ascending customer id); falls back to the
// vehicle's mean rating. Clamped to [1, 5]. Throws Error{ColdStart} when the
// vehicle has no ratings, Error{InvalidParam} when k < 1.
double predict_rating(const RatingMatrix& m, const CustomerId& customer, const VehicleId& vehicle,
                      int k = kDefaultNeighbors);

// Memoizes one customer's similarities so that scoring many vehicles costs
// one pass over the co-raters per vehicle.
class RatingPredictor {
 public:
  RatingPredictor(const RatingMatrix& m, CustomerId customer, int k = kDefaultNeighbors);

  // Same contract as predict_rating().
  double predict(const VehicleId& vehicle) const;

 private:
  const RatingMatrix& matrix_;
  CustomerId customer_;
  int k_;
  std::map<CustomerId, double> similarity_;  // only customers with overlap
};

struct ScoreWeights {
  double rating = 0.5;
  double cost = 0.25;
  double distance = 0.25;
};

struct RecommendationQuery {
  CustomerId customer_id;
  geo::GeoPoint location;
  std::optional<double> max_cost_per_km;
  std::optional<std::string> vehicle_type;
  int k_neighbors = kDefaultNeighbors;
};

struct FleetCandidate {
  VehicleId vehicle_id;
  std::string vehicle_type;
  geo::GeoPoint location;
  double cost_per_km;
  bool available = true;
};

struct Recommendation {
  VehicleId vehicle_id;
  double score;
  // Absent when the vehicle had no ratings and the neutral prior was used.
  std::optional<double> predicted_rating;
  double distance_km;
  double cost_per_km;
};

using RecommendationResult = std::vector<Recommendation>;

// Filters the fleet by availability, type and cost ceiling, then ranks by
//   w_r * (rating - 1) / 4 + w_c * (1 - cost_norm) + w_d * (1 - dist_norm)
// with min-max normalization over the filtered set. A cold-start vehicle
// takes the neutral rating term 0.5. Sorted by score, ties by vehicle id.
// Throws Error{EmptyFleet} when nothing passes the filters and
// Error{InvalidParam} for a non-positive cost or k.
RecommendationResult recommend(const RatingMatrix& m, const RecommendationQuery& q,
                               std::span<const FleetCandidate> fleet, const ScoreWeights& weights = {});

}  // namespace fleetline::recommender
