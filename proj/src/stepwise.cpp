#include <algorithm>

#include "devchat/error.hpp"
#include "devchat/model.hpp"

namespace devchat {

StepwiseResult stepwise_select(const DesignMatrix& dm, std::span<const std::size_t> candidates,
                               const LogisticOptions& options) {
  std::vector<std::size_t> remaining(candidates.begin(), candidates.end());
  std::sort(remaining.begin(), remaining.end());
  remaining.erase(std::unique(remaining.begin(), remaining.end()), remaining.end());
  for (auto c : remaining) {
    if (c >= dm.cols()) throw ValidationError("stepwise_select: candidate column out of range");
  }

  StepwiseResult result;
  double current = fit_logistic(dm.select_columns(result.selected), options).aic;
  result.trace.push_back({std::nullopt, current});

  while (!remaining.empty()) {
    std::size_t best_pos = remaining.size();
    double best_aic = current;
    std::vector<std::size_t> columns = result.selected;
    columns.push_back(0);
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      columns.back() = remaining[k];
      const double aic = fit_logistic(dm.select_columns(columns), options).aic;
      if (aic < best_aic) {
        best_aic = aic;
        best_pos = k;
      }
    }
    if (best_pos == remaining.size()) break;
    result.selected.push_back(remaining[best_pos]);
    result.trace.push_back({remaining[best_pos], best_aic});
    current = best_aic;
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
  }
  return result;
}

}  // namespace devchat
