#include "devchat/featureproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "devchat/error.hpp"
#include "devchat/kernels.hpp"
#include "devchat/random.hpp"

namespace devchat {

namespace {

std::span<const double> column_span(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

// Residual share 1 - R^2 below which a column counts as perfectly collinear.
constexpr double kCollinearTolerance = 1e-10;

}  // namespace

Normalized minmax_normalize(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() == 0) throw ValidationError("minmax_normalize: matrix has no rows");
  Normalized out;
  const auto cols = static_cast<std::size_t>(matrix.cols());
  out.params.min.resize(cols);
  out.params.max.resize(cols);
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    out.params.min[j] = matrix.col(j).minCoeff();
    out.params.max[j] = matrix.col(j).maxCoeff();
    if (out.params.min[j] == out.params.max[j]) out.constant_columns.push_back(static_cast<std::size_t>(j));
  }
  out.matrix = apply_normalization(matrix, out.params);
  return out;
}

Eigen::MatrixXd apply_normalization(const Eigen::MatrixXd& matrix, const NormalizationParams& params) {
  if (static_cast<std::size_t>(matrix.cols()) != params.min.size()) {
    throw ValidationError("apply_normalization: column count does not match the stored parameters");
  }
  Eigen::MatrixXd out(matrix.rows(), matrix.cols());
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    const double lo = params.min[j];
    const double range = params.max[j] - lo;
    if (range == 0.0) {
      out.col(j).setZero();
    } else {
      for (Eigen::Index i = 0; i < matrix.rows(); ++i) out(i, j) = (matrix(i, j) - lo) / range;
    }
  }
  return out;
}

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& column) {
  const auto n = static_cast<std::size_t>(column.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  Eigen::VectorXd ranks(column.size());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && column[order[j]] == column[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

Eigen::MatrixXd spearman_matrix(const Eigen::MatrixXd& matrix) {
  const Eigen::Index p = matrix.cols();
  Eigen::MatrixXd centered(matrix.rows(), p);
  std::vector<double> norms(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::VectorXd r = average_ranks(matrix.col(j));
    r.array() -= r.mean();
    centered.col(j) = r;
    norms[j] = std::sqrt(kernels::dot(column_span(centered, j), column_span(centered, j)));
  }
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a + 1; b < p; ++b) {
      double value = 0.0;
      if (norms[a] > 0.0 && norms[b] > 0.0) {
        value = kernels::dot(column_span(centered, a), column_span(centered, b)) / (norms[a] * norms[b]);
        value = std::clamp(value, -1.0, 1.0);
      }
      rho(a, b) = rho(b, a) = value;
    }
  }
  return rho;
}

CorrelationPrune correlation_prune(const Eigen::MatrixXd& matrix, double cutoff, std::uint64_t seed) {
  if (matrix.cols() == 0 || matrix.rows() == 0) throw ValidationError("correlation_prune: empty matrix");
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw ValidationError("correlation_prune: cutoff must lie in (0, 1)");
  CorrelationPrune out;
  out.correlation = spearman_matrix(matrix);
  const auto n = static_cast<std::size_t>(matrix.cols());
  Eigen::MatrixXd distance = 1.0 - out.correlation.array().abs();

  struct Node {
    std::size_t id;
    std::vector<std::size_t> members;
  };
  std::vector<Node> active;
  for (std::size_t j = 0; j < n; ++j) active.push_back({j, {j}});
  auto linkage = [&](const Node& a, const Node& b) {
    double sum = 0.0;
    for (auto x : a.members) {
      for (auto y : b.members) sum += distance(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    }
    return sum / static_cast<double>(a.members.size() * b.members.size());
  };

  // Union-find over columns for the flat cut.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  while (active.size() > 1) {
    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double d = linkage(active[a], active[b]);
        if (d < best) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    }
    Node merged{n + out.merges.size(), active[best_a].members};
    merged.members.insert(merged.members.end(), active[best_b].members.begin(), active[best_b].members.end());
    std::sort(merged.members.begin(), merged.members.end());
    out.merges.push_back({std::min(active[best_a].id, active[best_b].id), std::max(active[best_a].id, active[best_b].id),
                          best, merged.members.size()});
    if (best <= cutoff) {
      const auto root = find(merged.members.front());
      for (auto m : merged.members) parent[find(m)] = root;
    }
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    active[best_a] = std::move(merged);
  }

  std::vector<std::size_t> cluster_of_root(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto root = find(j);
    if (cluster_of_root[root] == n) {
      cluster_of_root[root] = out.clusters.size();
      out.clusters.emplace_back();
    }
    out.clusters[cluster_of_root[root]].push_back(j);
  }
  Rng rng(seed);
  for (std::size_t c = 0; c < out.clusters.size(); ++c) {
    const auto& members = out.clusters[c];
    const std::size_t keep = members.size() == 1 ? members.front() : members[rng.index(members.size())];
    out.retained.push_back(keep);
    for (auto m : members) {
      if (m != keep) out.dropped.emplace_back(m, c);
    }
  }
  std::sort(out.retained.begin(), out.retained.end());
  return out;
}

std::vector<double> vif(const Eigen::MatrixXd& matrix) {
  const Eigen::Index n = matrix.rows();
  const Eigen::Index p = matrix.cols();
  std::vector<double> out(static_cast<std::size_t>(p), 1.0);
  if (p == 0) return out;
  if (n == 0) throw ValidationError("vif: matrix has no rows");

  // Centered cross-product matrix; centering stands in for the intercept.
  const Eigen::RowVectorXd mean = matrix.colwise().mean();
  std::vector<double> gram(static_cast<std::size_t>(p * p), 0.0);
  std::vector<double> row(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) row[j] = matrix(i, j) - mean[j];
    kernels::syr_upper(1.0, row, gram);
  }
  Eigen::MatrixXd g(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a; b < p; ++b) g(a, b) = g(b, a) = gram[static_cast<std::size_t>(a * p + b)];
  }
  if (p == 1) return out;

  for (Eigen::Index j = 0; j < p; ++j) {
    const double total = g(j, j);
    if (total <= 0.0) {
      out[j] = kInfiniteVif;
      continue;
    }
    std::vector<Eigen::Index> others;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k != j) others.push_back(k);
    }
    const auto m = static_cast<Eigen::Index>(others.size());
    Eigen::MatrixXd sub(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      rhs[a] = g(others[a], j);
      for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = g(others[a], others[b]);
    }
    const Eigen::VectorXd coef = sub.colPivHouseholderQr().solve(rhs);
    const double residual = total - rhs.dot(coef);
    const double unexplained = residual / total;
    out[j] = unexplained < kCollinearTolerance ? kInfiniteVif : 1.0 / unexplained;
  }
  return out;
}

VifPrune vif_prune(const Eigen::MatrixXd& matrix, double threshold) {
  VifPrune out;
  out.retained.resize(static_cast<std::size_t>(matrix.cols()));
  std::iota(out.retained.begin(), out.retained.end(), 0);
  while (out.retained.size() > 1) {
    Eigen::MatrixXd sub(matrix.rows(), static_cast<Eigen::Index>(out.retained.size()));
    for (std::size_t k = 0; k < out.retained.size(); ++k) {
      sub.col(static_cast<Eigen::Index>(k)) = matrix.col(static_cast<Eigen::Index>(out.retained[k]));
    }
    const auto values = vif(sub);
    // Largest VIF; ties go to the later column.
    std::size_t worst = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
      if (values[k] >= values[worst]) worst = k;
    }
    if (!(values[worst] > threshold)) break;
    out.dropped.push_back({out.retained[worst], values[worst]});
    out.retained.erase(out.retained.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  return out;
}

PruneResult prune_features(const Eigen::MatrixXd& matrix, std::span<const std::string> names,
                           const PruneOptions& options) {
  if (static_cast<std::size_t>(matrix.cols()) != names.size()) {
    throw ValidationError("prune_features: column names do not match the matrix");
  }
  PruneResult result;
  auto& report = result.report;
  report.options = options;
  report.input_columns.assign(names.begin(), names.end());

  const Normalized normalized = minmax_normalize(matrix);
  std::vector<std::size_t> varying;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (std::find(normalized.constant_columns.begin(), normalized.constant_columns.end(), j) !=
        normalized.constant_columns.end()) {
      report.constant_dropped.push_back(names[j]);
    } else {
      varying.push_back(j);
    }
  }
  if (varying.empty()) throw ValidationError("prune_features: every column is constant");
  auto select = [&](const std::vector<std::size_t>& cols) {
    Eigen::MatrixXd m(normalized.matrix.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      m.col(static_cast<Eigen::Index>(k)) = normalized.matrix.col(static_cast<Eigen::Index>(cols[k]));
    }
    return m;
  };

  const Eigen::MatrixXd stage1 = select(varying);
  const CorrelationPrune corr = correlation_prune(stage1, options.correlation_cutoff, options.seed);
  for (auto j : varying) report.merge_columns.push_back(names[j]);
  report.merges = corr.merges;
  for (const auto& [column, cluster] : corr.dropped) {
    PruneReport::CorrelationDrop drop{names[varying[column]], cluster, {}};
    for (auto m : corr.clusters[cluster]) drop.cluster_members.push_back(names[varying[m]]);
    report.correlation_dropped.push_back(std::move(drop));
  }
  std::vector<std::size_t> after_corr;
  for (auto k : corr.retained) after_corr.push_back(varying[k]);

  const VifPrune vp = vif_prune(select(after_corr), options.vif_threshold);
  for (const auto& d : vp.dropped) report.vif_dropped.emplace_back(names[after_corr[d.column]], d.vif);
  std::vector<std::size_t> kept;
  for (auto k : vp.retained) kept.push_back(after_corr[k]);

  result.matrix = select(kept);
  for (auto j : kept) {
    report.retained_columns.push_back(names[j]);
    report.normalization.min.push_back(normalized.params.min[j]);
    report.normalization.max.push_back(normalized.params.max[j]);
  }
  return result;
}

nlohmann::json to_json(const PruneReport& r) {
  using nlohmann::json;
  auto number = [](double v) -> json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  json corr = json::array();
  for (const auto& d : r.correlation_dropped) {
    corr.push_back({{"column", d.column}, {"reason", "correlation cluster " + std::to_string(d.cluster)},
                    {"cluster", d.cluster}, {"cluster_members", d.cluster_members}});
  }
  json vifs = json::array();
  for (const auto& [name, value] : r.vif_dropped) vifs.push_back({{"column", name}, {"reason", "vif"}, {"vif", number(value)}});
  json merges = json::array();
  for (const auto& m : r.merges) {
    merges.push_back({{"left", m.left}, {"right", m.right}, {"distance", m.distance}, {"size", m.size}});
  }
  json norm = json::array();
  for (std::size_t i = 0; i < r.retained_columns.size(); ++i) {
    norm.push_back({{"column", r.retained_columns[i]}, {"min", r.normalization.min[i]}, {"max", r.normalization.max[i]}});
  }
  return {
      {"seed", r.options.seed},
      {"correlation_cutoff", r.options.correlation_cutoff},
      {"vif_threshold", r.options.vif_threshold},
      {"input_columns", r.input_columns},
      {"retained_columns", r.retained_columns},
      {"dropped",
       {{"constant", r.constant_dropped}, {"correlation", std::move(corr)}, {"vif", std::move(vifs)}}},
      {"dendrogram", {{"leaves", r.merge_columns}, {"merges", std::move(merges)}}},
      {"normalization", std::move(norm)},
  };
}

}  // namespace devchat
