#include <algorithm>
#include <numeric>

#include "devchat/error.hpp"
#include "devchat/evaluation.hpp"
#include "devchat/kernels.hpp"
#include "devchat/random.hpp"
#include "logit_math.hpp"

namespace devchat {

namespace {

struct Classes {
  std::vector<std::size_t> minority;
  std::vector<std::size_t> majority;
  int minority_label = 1;
};

Classes split_classes(const DesignMatrix& dm) {
  Classes c;
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < dm.rows(); ++i) (dm.y[i] == 1 ? pos : neg).push_back(i);
  if (pos.size() <= neg.size()) {
    c.minority = std::move(pos);
    c.majority = std::move(neg);
    c.minority_label = 1;
  } else {
    c.minority = std::move(neg);
    c.majority = std::move(pos);
    c.minority_label = 0;
  }
  return c;
}

}  // namespace

std::string_view to_string(SamplingStrategy strategy) {
  switch (strategy) {
    case SamplingStrategy::None: return "none";
    case SamplingStrategy::Undersample: return "undersample";
    case SamplingStrategy::Smote: return "smote";
  }
  return "none";
}

SamplingStrategy parse_sampling_strategy(std::string_view text) {
  if (text == "none") return SamplingStrategy::None;
  if (text == "undersample") return SamplingStrategy::Undersample;
  if (text == "smote") return SamplingStrategy::Smote;
  throw ValidationError("unknown sampling strategy '" + std::string(text) + "' (expected none, undersample or smote)");
}

DesignMatrix undersample(const DesignMatrix& dm, std::uint64_t seed, SamplingTally* tally) {
  const Classes c = split_classes(dm);
  std::vector<std::size_t> keep_majority = c.majority;
  Rng rng(seed);
  rng.shuffle(keep_majority);
  keep_majority.resize(c.minority.size());
  std::vector<std::size_t> rows = c.minority;
  rows.insert(rows.end(), keep_majority.begin(), keep_majority.end());
  std::sort(rows.begin(), rows.end());
  if (tally != nullptr) tally->removed += dm.rows() - rows.size();
  return dm.select_rows(rows);
}

DesignMatrix smote(const DesignMatrix& dm, std::size_t k, std::uint64_t seed, SamplingTally* tally) {
  if (k < 1) throw ValidationError("smote: k must be at least 1");
  const Classes c = split_classes(dm);
  const std::size_t m = c.minority.size();
  if (m < 2) throw ValidationError("smote: the minority class needs at least 2 rows");
  if (k > m - 1) {
    k = m - 1;
    if (tally != nullptr) tally->k_clamped = true;
  }
  const std::size_t needed = c.majority.size() - m;

  std::vector<std::size_t> all(dm.rows());
  std::iota(all.begin(), all.end(), 0);
  DesignMatrix out = dm.select_rows(all);
  if (needed == 0) return out;

  // Neighbour lists are computed lazily per base row.
  std::vector<std::vector<std::size_t>> neighbours(m);
  auto nearest = [&](std::size_t a) -> const std::vector<std::size_t>& {
    auto& list = neighbours[a];
    if (!list.empty()) return list;
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(m - 1);
    const auto xa = row_span(dm.x, c.minority[a]);
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a) continue;
      dist.emplace_back(kernels::squared_distance(xa, row_span(dm.x, c.minority[b])), b);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t j = 0; j < k; ++j) list.push_back(dist[j].second);
    return list;
  };

  Rng rng(seed);
  const auto base_rows = static_cast<Eigen::Index>(dm.rows());
  out.x.conservativeResize(base_rows + static_cast<Eigen::Index>(needed), Eigen::NoChange);
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t a = rng.index(m);
    const std::size_t b = nearest(a)[rng.index(k)];
    const double gap = rng.uniform();
    const auto ra = static_cast<Eigen::Index>(c.minority[a]);
    const auto rb = static_cast<Eigen::Index>(c.minority[b]);
    const auto row = base_rows + static_cast<Eigen::Index>(s);
    out.x.row(row) = dm.x.row(ra) + gap * (dm.x.row(rb) - dm.x.row(ra));
    out.y.push_back(c.minority_label);
    out.group.push_back(dm.group[c.minority[a]]);
    out.row_ids.push_back("synthetic:" + std::to_string(s));
    out.synthetic.push_back(true);
  }
  if (tally != nullptr) tally->synthetic += needed;
  return out;
}

DesignMatrix apply_sampling(const DesignMatrix& dm, SamplingStrategy strategy, std::size_t smote_k,
                            std::uint64_t seed, SamplingTally* tally) {
  switch (strategy) {
    case SamplingStrategy::None: {
      std::vector<std::size_t> all(dm.rows());
      std::iota(all.begin(), all.end(), 0);
      return dm.select_rows(all);
    }
    case SamplingStrategy::Undersample: return undersample(dm, seed, tally);
    case SamplingStrategy::Smote: return smote(dm, smote_k, seed, tally);
  }
  throw ValidationError("unknown sampling strategy");
}

}  // namespace devchat
