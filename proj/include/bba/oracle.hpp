#pragma once

#include <cstdint>
#include <functional>

#include "bba/common.hpp"

namespace bba {

/// One black-box query result: the predicted class and the probability the
/// model assigns to that prediction (>= 0.5 for binary models).
struct OracleResponse {
  int label = 0;
  double confidence = 0.0;
};

/// Counts oracle invocations. Each attack run owns its own counter.
class QueryCounter {
 public:
  std::uint64_t count() const { return count_; }
  void reset() { count_ = 0; }
  void increment() { ++count_; }

 private:
  std::uint64_t count_ = 0;
};

using Oracle = std::function<OracleResponse(const FeatureVector&)>;

/// Wraps an oracle so every invocation bumps the counter exactly once before
/// the query is answered.
inline Oracle counting_oracle(Oracle inner, QueryCounter& counter) {
  return [inner = std::move(inner), &counter](const FeatureVector& x) {
    counter.increment();
    return inner(x);
  };
}

}  // namespace bba
