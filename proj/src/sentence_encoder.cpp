#include "sludec/sentence_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sludec {

std::vector<double> normalize_confidences(const std::vector<double>& raw) {
  if (raw.empty()) throw DomainError("normalize_confidences: empty list");
  for (double x : raw)
    if (!std::isfinite(x)) throw DomainError("normalize_confidences: non-finite score");

  std::vector<double> p = raw;
  const bool log_domain = std::any_of(raw.begin(), raw.end(), [](double x) { return x < 0; });
  if (log_domain) {
    const double top = *std::max_element(raw.begin(), raw.end());
    for (auto& x : p) x = std::exp(x - top);
  }
  // Summing in sorted order makes the result independent of list order.
  std::vector<double> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (total <= 0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return p;
  }
  for (auto& x : p) x /= total;
  return p;
}

}  // namespace sludec
