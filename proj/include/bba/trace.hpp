#pragma once

#include <ostream>

#include <json.hpp>

#include "bba/attack.hpp"

namespace bba {

/// One JSON object per line and per query: step index, sparse feature deltas
/// against the seed, label, confidence, objective value and cumulative L1
/// cost.
inline void write_trace_jsonl(const AttackOutcome& outcome,
                              const FeatureVector& seed, std::ostream& os) {
  for (const QueryRecord& rec : outcome.trace) {
    nlohmann::json deltas = nlohmann::json::array();
    for (int d = 0; d < seed.size(); ++d) {
      const double delta = rec.point[d] - seed[d];
      if (delta != 0.0) deltas.push_back({d, delta});
    }
    const nlohmann::json line = {
        {"step", rec.step},         {"deltas", deltas},
        {"label", rec.label},       {"confidence", rec.confidence},
        {"objective", rec.objective}, {"cost", rec.cost},
    };
    os << line.dump() << '\n';
  }
}

}  // namespace bba
