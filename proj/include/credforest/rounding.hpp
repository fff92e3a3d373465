#pragma once

#include <cstdint>

#include "credforest/types.hpp"

namespace credforest {

__extension__ typedef __int128 Wide;

/// Exact quotient num/den rounded half-to-even. Requires den > 0.
constexpr Wide div_round_half_even(Wide num, Wide den) {
  Wide q = num / den;
  Wide r = num % den;
  if (r < 0) {  // floor division
    q -= 1;
    r += den;
  }
  const Wide twice = 2 * r;
  if (twice > den || (twice == den && (q % 2 != 0))) {
    q += 1;
  }
  return q;
}

/// round-half-even(rate * amount * periods / 1e6)
constexpr Amount scale_by_ppm(Ppm rate, Amount amount, std::int64_t periods) {
  return static_cast<Amount>(div_round_half_even(
      static_cast<Wide>(rate.value) * amount * periods, kPpmScale));
}

}  // namespace credforest
