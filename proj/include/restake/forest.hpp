#pragma once

// Regression random forest (CART trees on bootstrap resamples) with
// variance-reduction ("Gini") and permutation feature importance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "restake/core/error.hpp"
#include "restake/core/io.hpp"
#include "restake/core/rng.hpp"
#include "restake/econometrics/design_matrix.hpp"

namespace restake::forest {

enum class MaxFeatures { AllOverThree, Sqrt, All };

inline const char* to_string(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::AllOverThree: return "p/3";
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::All: return "all";
  }
  return "?";
}

inline MaxFeatures parse_max_features(std::string_view s) {
  if (s == "p/3" || s == "third") return MaxFeatures::AllOverThree;
  if (s == "sqrt") return MaxFeatures::Sqrt;
  if (s == "all") return MaxFeatures::All;
  throw ValidationError("unknown max_features rule '" + std::string(s) + "' (p/3, sqrt, all)");
}

struct ForestConfig {
  int n_trees = 500;
  MaxFeatures max_features = MaxFeatures::AllOverThree;
  int min_leaf = 5;
  std::uint64_t seed = 0;
  bool bootstrap = true;
  /// Worker threads for tree training; 0 = hardware concurrency. Output does not depend on it.
  unsigned threads = 0;

  void validate() const {
    if (n_trees < 1) throw ValidationError("n_trees must be >= 1");
    if (min_leaf < 1) throw ValidationError("min_leaf must be >= 1");
  }
};

/// Candidate features per split.
inline std::size_t features_per_split(MaxFeatures rule, std::size_t p) {
  switch (rule) {
    case MaxFeatures::AllOverThree: return std::max<std::size_t>(1, p / 3);
    case MaxFeatures::Sqrt:
      return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
    case MaxFeatures::All: return p;
  }
  return p;
}

struct TreeNode {
  int feature = -1;  ///< -1 for a leaf
  double threshold = 0;  ///< go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0;  ///< mean response of the node's samples
  double sse_reduction = 0;
  std::size_t samples = 0;
};

class Tree {
 public:
  std::vector<TreeNode> nodes;
  /// Bootstrap multiplicity of each training row.
  std::vector<std::uint32_t> in_bag;
  /// Training rows drawn (sum of in_bag).
  std::size_t n_drawn = 0;

  double predict(std::span<const double> x) const {
    std::size_t at = 0;
    while (nodes[at].feature >= 0) {
      const auto& n = nodes[at];
      at = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[at].value;
  }

  bool is_leaf() const { return nodes.size() == 1; }
};

namespace detail {

struct Training {
  const std::vector<std::vector<double>>& cols;  // column-major features
  const std::vector<double>& y;
  const ForestConfig& config;
  std::size_t mtry;
};

class TreeBuilder {
 public:
  TreeBuilder(const Training& t, Rng rng) : t_(t), rng_(std::move(rng)) {}

  Tree build() {
    const std::size_t n = t_.y.size();
    Tree tree;
    tree.in_bag.assign(n, 0);
    std::vector<std::size_t> rows;
    rows.reserve(n);
    if (t_.config.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) rows.push_back(static_cast<std::size_t>(rng_.index(n)));
      std::sort(rows.begin(), rows.end());
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    for (auto r : rows) ++tree.in_bag[r];
    tree.n_drawn = rows.size();
    tree_ = &tree;
    grow(rows);
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0;
    double gain = 0;
    std::size_t left_count = 0;
  };

  int grow(std::vector<std::size_t>& rows) {
    const int id = static_cast<int>(tree_->nodes.size());
    tree_->nodes.push_back({});
    double sum = 0;
    double sumsq = 0;
    for (auto r : rows) {
      sum += t_.y[r];
      sumsq += t_.y[r] * t_.y[r];
    }
    const double n = static_cast<double>(rows.size());
    tree_->nodes[static_cast<std::size_t>(id)].value = sum / n;
    tree_->nodes[static_cast<std::size_t>(id)].samples = rows.size();
    const auto min_leaf = static_cast<std::size_t>(t_.config.min_leaf);
    if (rows.size() < 2 * min_leaf) return id;
    const double sse = sumsq - sum * sum / n;
    if (!(sse > 1e-12 * sumsq)) return id;

    const Split s = best_split(rows, sum, sse);
    if (s.feature < 0) return id;
    std::vector<std::size_t> left, right;
    left.reserve(s.left_count);
    right.reserve(rows.size() - s.left_count);
    const auto& col = t_.cols[static_cast<std::size_t>(s.feature)];
    for (auto r : rows) (col[r] <= s.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left);
    const int r = grow(right);
    auto& node = tree_->nodes[static_cast<std::size_t>(id)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.sse_reduction = s.gain;
    node.left = l;
    node.right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& rows, double total, double sse) {
    const std::size_t p = t_.cols.size();
    // partial Fisher-Yates: the first mtry entries are the sampled features
    std::vector<std::size_t> features(p);
    std::iota(features.begin(), features.end(), std::size_t{0});
    for (std::size_t i = 0; i < t_.mtry; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.index(p - i));
      std::swap(features[i], features[j]);
    }
    const auto min_leaf = static_cast<std::size_t>(t_.config.min_leaf);
    const std::size_t n = rows.size();
    const double parent = total * total / static_cast<double>(n);
    Split best;
    best.gain = 1e-12 * sse;
    std::vector<std::size_t> order(n);
    for (std::size_t fi = 0; fi < t_.mtry; ++fi) {
      const std::size_t f = features[fi];
      const auto& col = t_.cols[f];
      order = rows;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
      double left_sum = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += t_.y[order[i]];
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf) continue;
        if (nr < min_leaf) break;
        const double a = col[order[i]];
        const double b = col[order[i + 1]];
        if (!(a < b)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - parent;
        if (gain > best.gain) {
          double mid = a + (b - a) / 2;
          if (!(mid < b)) mid = a;
          best = {static_cast<int>(f), mid, gain, nl};
        }
      }
    }
    return best;
  }

  const Training& t_;
  Rng rng_;
  Tree* tree_ = nullptr;
};

inline std::vector<std::vector<double>> columns_of(const econ::DesignMatrix& x) {
  std::vector<std::vector<double>> cols;
  for (const auto& c : x.columns()) cols.push_back(c.values);
  return cols;
}

/// Runs f(0..n-1) on up to `threads` workers; results land in index order.
template <class F>
auto parallel_map(std::size_t n, unsigned threads, F f) -> std::vector<decltype(f(std::size_t{0}))> {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(n);
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = f(i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace detail

class Forest {
 public:
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;
  ForestConfig config;
  std::size_t n_train = 0;
  /// Training data kept for out-of-bag scoring.
  std::vector<std::vector<double>> train_columns;
  std::vector<double> train_y;

  std::size_t n_features() const { return feature_names.size(); }

  double predict(std::span<const double> x) const {
    if (x.size() != n_features())
      throw ValidationError("predict: expected " + std::to_string(n_features()) + " features, got " +
                            std::to_string(x.size()));
    double s = 0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }

  /// Predictions for every row of a design with the training feature names.
  std::vector<double> predict(const econ::DesignMatrix& x) const {
    const auto cols = aligned_columns(x);
    return predict_columns(cols);
  }

  std::vector<double> predict_columns(const std::vector<std::vector<double>>& cols) const {
    const std::size_t n = cols.empty() ? 0 : cols[0].size();
    std::vector<double> out(n);
    std::vector<double> row(n_features());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = cols[j][i];
      out[i] = predict(row);
    }
    return out;
  }

  std::vector<std::vector<double>> aligned_columns(const econ::DesignMatrix& x) const {
    std::vector<std::vector<double>> cols;
    for (const auto& name : feature_names) cols.push_back(x.column(name).values);
    if (x.columns().size() != feature_names.size())
      throw ValidationError("predict: design has " + std::to_string(x.columns().size()) +
                            " features, forest was trained on " + std::to_string(feature_names.size()));
    return cols;
  }

  bool has_splits() const {
    return std::any_of(trees.begin(), trees.end(), [](const Tree& t) { return !t.is_leaf(); });
  }
};

inline Forest fit_forest(const econ::DesignMatrix& x, const ForestConfig& config) {
  config.validate();
  if (x.n() == 0 || x.columns().empty()) throw ValidationError("fit_forest: empty design");
  if (x.n() < 2 * static_cast<std::size_t>(config.min_leaf))
    throw InsufficientDataError("fit_forest: need n >= 2 * min_leaf (n=" + std::to_string(x.n()) +
                                ", min_leaf=" + std::to_string(config.min_leaf) + ")");
  Forest f;
  f.config = config;
  f.n_train = x.n();
  for (const auto& c : x.columns()) f.feature_names.push_back(c.name);
  f.train_columns = detail::columns_of(x);
  f.train_y = x.y();
  const detail::Training t{f.train_columns, f.train_y, f.config,
                           features_per_split(config.max_features, f.feature_names.size())};
  f.trees = detail::parallel_map(static_cast<std::size_t>(config.n_trees), config.threads, [&](std::size_t i) {
    return detail::TreeBuilder(t, Rng(derive_seed(config.seed, i))).build();
  });
  return f;
}

/// Mean squared out-of-bag error using the first `n_trees` trees (all when
/// empty). Rows never out of bag are skipped; NaN when no row is.
inline double oob_error(const Forest& f, std::optional<std::size_t> n_trees = std::nullopt) {
  const std::size_t use = std::min(n_trees.value_or(f.trees.size()), f.trees.size());
  double sse = 0;
  std::size_t counted = 0;
  std::vector<double> row(f.n_features());
  for (std::size_t i = 0; i < f.n_train; ++i) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = f.train_columns[j][i];
    double s = 0;
    std::size_t k = 0;
    for (std::size_t t = 0; t < use; ++t) {
      if (f.trees[t].in_bag[i] != 0) continue;
      s += f.trees[t].predict(row);
      ++k;
    }
    if (k == 0) continue;
    const double e = f.train_y[i] - s / static_cast<double>(k);
    sse += e * e;
    ++counted;
  }
  return counted ? sse / static_cast<double>(counted) : std::nan("");
}

inline double r_squared(const std::vector<double>& y, const std::vector<double>& pred) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double rss = 0, tss = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    rss += (y[i] - pred[i]) * (y[i] - pred[i]);
    tss += (y[i] - mean) * (y[i] - mean);
  }
  if (tss == 0) return rss == 0 ? 1.0 : 0.0;
  return 1.0 - rss / tss;
}

struct GiniImportance {
  std::vector<double> values;  ///< per feature, sums to 1 when any split exists
  bool no_splits = false;
};

/// Per tree: sum over splits on each feature of the SSE reduction divided by
/// the tree's drawn sample size; averaged over trees, then normalized.
inline GiniImportance gini_importance(const Forest& f) {
  GiniImportance g;
  g.values.assign(f.n_features(), 0.0);
  for (const auto& t : f.trees) {
    std::vector<double> per(f.n_features(), 0.0);
    for (const auto& n : t.nodes)
      if (n.feature >= 0) per[static_cast<std::size_t>(n.feature)] += n.sse_reduction;
    for (std::size_t j = 0; j < per.size(); ++j)
      g.values[j] += per[j] / static_cast<double>(t.n_drawn) / static_cast<double>(f.trees.size());
  }
  const double total = std::accumulate(g.values.begin(), g.values.end(), 0.0);
  if (!(total > 0)) {
    std::fill(g.values.begin(), g.values.end(), 0.0);
    g.no_splits = true;
    return g;
  }
  for (auto& v : g.values) v /= total;
  return g;
}

enum class Scoring {
  OutOfBag,  ///< each training row predicted by the trees that did not draw it
  AllTrees,  ///< every row predicted by the whole forest (holdout data)
};

inline const char* to_string(Scoring s) { return s == Scoring::OutOfBag ? "out-of-bag" : "all-trees"; }

namespace detail {

/// Out-of-bag predictions; rows no tree left out fall back to the full forest.
inline std::vector<double> oob_predict(const Forest& f, const std::vector<std::vector<double>>& cols) {
  std::vector<double> out(f.n_train);
  std::vector<double> row(f.n_features());
  for (std::size_t i = 0; i < f.n_train; ++i) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = cols[j][i];
    double s = 0;
    std::size_t k = 0;
    for (const auto& t : f.trees) {
      if (t.in_bag[i] != 0) continue;
      s += t.predict(row);
      ++k;
    }
    out[i] = k ? s / static_cast<double>(k) : f.predict(row);
  }
  return out;
}

}  // namespace detail

/// Mean drop in R^2 on `x` when one feature column is shuffled, over
/// `repeats` shuffles. Repeat r of feature j uses seed derive_seed(derive_seed(seed, j), r).
/// OutOfBag scoring requires `x` to hold the training rows.
inline std::vector<double> permutation_importance(const Forest& f, const econ::DesignMatrix& x, int repeats,
                                                  std::uint64_t seed, Scoring scoring = Scoring::OutOfBag) {
  if (repeats < 1) throw ValidationError("permutation_importance: repeats must be >= 1");
  if (scoring == Scoring::OutOfBag && x.n() != f.n_train)
    throw ValidationError("out-of-bag scoring needs the training rows (got " + std::to_string(x.n()) +
                          ", trained on " + std::to_string(f.n_train) + ")");
  auto cols = f.aligned_columns(x);
  const auto& y = x.y();
  auto score = [&](const std::vector<std::vector<double>>& c) {
    return r_squared(y, scoring == Scoring::OutOfBag ? detail::oob_predict(f, c) : f.predict_columns(c));
  };
  const double baseline = score(cols);
  std::vector<double> out(f.n_features(), 0.0);
  for (std::size_t j = 0; j < f.n_features(); ++j) {
    const std::vector<double> original = cols[j];
    double drop = 0;
    for (int r = 0; r < repeats; ++r) {
      Rng rng(derive_seed(derive_seed(seed, j), static_cast<std::uint64_t>(r)));
      cols[j] = original;
      rng.shuffle(std::span<double>(cols[j]));
      drop += baseline - score(cols);
    }
    cols[j] = original;
    out[j] = drop / repeats;
  }
  return out;
}

struct ImportanceReport {
  std::vector<std::string> features;
  std::vector<double> gini;
  std::vector<double> permutation;
  int repeats = 0;
  std::uint64_t seed = 0;
  bool no_splits = false;
  Scoring scoring = Scoring::OutOfBag;
  ForestConfig config;
  std::size_t n_train = 0;
  std::size_t n_scored = 0;
  double oob_mse = 0;
};

/// Drops the Events dummy unless asked to keep it.
inline econ::DesignMatrix importance_design(const econ::DesignMatrix& x, bool include_events = false) {
  if (include_events || !x.has_column("Events")) return x;
  return x.without({"Events"});
}

/// Fits on `train` and scores permutations on `score` (the same matrix by default).
inline ImportanceReport importance_report(const econ::DesignMatrix& train, const ForestConfig& config,
                                          int repeats, std::optional<econ::DesignMatrix> score = std::nullopt) {
  const Forest f = fit_forest(train, config);
  const auto& scored = score ? *score : train;
  ImportanceReport rep;
  rep.features = f.feature_names;
  const auto g = gini_importance(f);
  rep.gini = g.values;
  rep.no_splits = g.no_splits;
  rep.scoring = score ? Scoring::AllTrees : Scoring::OutOfBag;
  rep.permutation = permutation_importance(f, scored, repeats, config.seed, rep.scoring);
  rep.repeats = repeats;
  rep.seed = config.seed;
  rep.config = config;
  rep.n_train = train.n();
  rep.n_scored = scored.n();
  rep.oob_mse = oob_error(f);
  return rep;
}

inline nlohmann::ordered_json to_json(const ForestConfig& c) {
  return {{"n_trees", c.n_trees},
          {"max_features", to_string(c.max_features)},
          {"min_leaf", c.min_leaf},
          {"seed", c.seed},
          {"bootstrap", c.bootstrap}};
}

inline nlohmann::ordered_json to_json(const ImportanceReport& r) {
  nlohmann::ordered_json j;
  j["config"] = to_json(r.config);
  j["repeats"] = r.repeats;
  j["seed"] = r.seed;
  j["n_train"] = r.n_train;
  j["n_scored"] = r.n_scored;
  j["scoring"] = to_string(r.scoring);
  j["oob_mse"] = std::isfinite(r.oob_mse) ? nlohmann::ordered_json(r.oob_mse) : nlohmann::ordered_json(nullptr);
  j["no_splits"] = r.no_splits;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.features.size(); ++i)
    rows.push_back({{"feature", r.features[i]}, {"gini", r.gini[i]}, {"permutation", r.permutation[i]}});
  j["features"] = std::move(rows);
  return j;
}

/// "Feature  Gini  Permutation", sorted by Gini descending.
inline std::string render_table(const ImportanceReport& r) {
  std::vector<std::size_t> order(r.features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.gini[a] > r.gini[b]; });
  std::size_t w = 7;
  for (const auto& f : r.features) w = std::max(w, f.size());
  auto pad = [](std::string s, std::size_t width, bool left) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
  };
  std::string out = pad("Feature", w, true) + "  " + pad("Gini", 8, false) + "  " + pad("Permutation", 11, false) + "\n";
  out += std::string(w + 23, '-') + "\n";
  for (auto i : order)
    out += pad(r.features[i], w, true) + "  " + pad(format_fixed(r.gini[i], 4), 8, false) + "  " +
           pad(format_fixed(r.permutation[i], 4), 11, false) + "\n";
  out += "trees=" + std::to_string(r.config.n_trees) + " max_features=" + to_string(r.config.max_features) +
         " min_leaf=" + std::to_string(r.config.min_leaf) + " seed=" + std::to_string(r.seed) +
         " repeats=" + std::to_string(r.repeats) + " scoring=" + to_string(r.scoring) + (r.no_splits ? " (no splits)" : "") + "\n";
  return out;
}

}  // namespace restake::forest
