#pragma once

#include <stdexcept>
#include <string>

namespace dbmc {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched sizes between operands (state length, layer width, vector length).
struct dimension_error : error {
  using error::error;
};

// Value outside the admissible set (bad symbol, negative probability, non-finite parameter).
struct domain_error : error {
  using error::error;
};

// An operation that divides by a distribution hit a zero where positivity is required.
struct positivity_error : error {
  using error::error;
};

// Elementwise product of two distributions has zero total mass.
struct degenerate_product_error : error {
  using error::error;
};

// Conditioning event has zero probability.
struct conditioning_error : error {
  using error::error;
};

// State space or enumeration larger than the configured limit.
struct size_error : error {
  using error::error;
};

// Malformed serialized input.
struct parse_error : error {
  using error::error;
};

// Support plan or sharing step violates its structural constraints.
struct plan_error : error {
  using error::error;
};

}  // namespace dbmc
