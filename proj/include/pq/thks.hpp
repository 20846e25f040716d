#pragma once

// Tobacco and health knowledge scale outcomes: subgroup (classroom curriculum
// CC, television TV) crossed with the post-intervention Pass/Fail result,
// with the policy maker's preference relation over the eight outcomes.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pq/finite.hpp"
#include "pq/order.hpp"

namespace pq::thks {

const std::vector<std::string>& labels();
const std::vector<std::int64_t>& counts();
/// Arcs `src -> dst` meaning src ⪯ dst.
const std::vector<std::pair<std::string, std::string>>& arcs();

PartialOrder order();

template <typename Scalar>
FiniteDistribution<Scalar> distribution() {
  return FiniteDistribution<Scalar>::from_counts(labels(), counts());
}

}  // namespace pq::thks
