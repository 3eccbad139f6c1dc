#pragma once

#include "fedac/types.hpp"

namespace fedac {

/// Sum of get(i) for i in [begin, end) by recursive halving in index order.
/// This is the canonical reduction for worker averages; results do not
/// depend on how the summands were scheduled.
template <typename Get>
Vector pairwise_sum(Index begin, Index end, const Get &get) {
  if (end - begin == 1)
    return get(begin);
  const Index mid = begin + (end - begin) / 2;
  Vector left = pairwise_sum(begin, mid, get);
  left += pairwise_sum(mid, end, get);
  return left;
}

template <typename Get> Vector pairwise_mean(Index count, const Get &get) {
  return pairwise_sum(0, count, get) / static_cast<double>(count);
}

} // namespace fedac
