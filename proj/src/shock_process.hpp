#pragma once

#include <cstdint>
#include <optional>

#include "cumdamage/scenario.hpp"
#include "cumdamage/stochastic.hpp"

namespace cumdamage::detail {

/// Draws (X_i, W_i) pairs in a fixed order: the inter-arrival time first,
/// then the damage. Every consumer of a replication stream goes through here
/// so paths agree draw-for-draw.
class ShockProcess {
 public:
  ShockProcess(const Scenario& scenario, RandomStream& stream)
      : scenario_(scenario), stream_(stream) {}

  struct Shock {
    double gap;
    double damage;
  };

  Shock next(std::uint64_t i) {
    const double gap = sample(scenario_.inter_arrival, stream_);
    const DamageDraw draw = damage_at(scenario_.damage, i, stream_, shared_);
    shared_ = draw.shared_state;
    return {gap, draw.damage};
  }

 private:
  const Scenario& scenario_;
  RandomStream& stream_;
  std::optional<double> shared_;
};

}  // namespace cumdamage::detail
