#include "extrapolmv/cart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>

namespace extrapolmv {

double TreeNode::record_fraction() const {
  return total_records > 0 ? static_cast<double>(records) / static_cast<double>(total_records) : 0.0;
}

std::size_t TreeNode::depth() const {
  std::size_t d = 0;
  for (const auto& c : children) d = std::max(d, 1 + c.depth());
  return d;
}

std::size_t TreeNode::leaf_count() const {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

void TreeParams::validate() const {
  if (max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
  if (min_leaf < 1) throw std::invalid_argument("min_leaf must be at least 1");
  if (!(min_split_gain >= 0.0)) throw std::invalid_argument("min_split_gain must be non-negative");
  if (class_weights && !(class_weights->first > 0.0 && class_weights->second > 0.0)) {
    throw std::invalid_argument("class weights must be positive");
  }
}

double gini_impurity(double w0, double w1) {
  const double w = w0 + w1;
  if (w <= 0.0) return 0.0;
  const double p0 = w0 / w, p1 = w1 / w;
  return 1.0 - p0 * p0 - p1 * p1;
}

namespace {

constexpr double kGainTol = 1e-12;

struct Grower {
  const Matrix& x;
  const std::vector<int>& y;
  const std::vector<std::string>& names;
  const TreeParams& params;
  double w0 = 1.0, w1 = 1.0;
  long total = 0;

  void fill_counts(TreeNode& node, const std::vector<Index>& rows) const {
    node.n0 = node.n1 = 0;
    for (Index i : rows) (y[static_cast<std::size_t>(i)] ? node.n1 : node.n0)++;
    node.records = node.n0 + node.n1;
    node.total_records = total;
    node.prediction = w1 * static_cast<double>(node.n1) > w0 * static_cast<double>(node.n0) ? 1 : 0;
    node.proportion = static_cast<double>(node.prediction ? node.n1 : node.n0) / static_cast<double>(node.records);
  }

  struct Split {
    Index feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  Split best_split(const TreeNode& node, std::vector<Index> rows) const {
    Split best;
    const double c0 = w0 * static_cast<double>(node.n0), c1 = w1 * static_cast<double>(node.n1);
    const double parent = gini_impurity(c0, c1);
    const double weight = c0 + c1;
    const auto n = static_cast<long>(rows.size());
    for (Index f = 0; f < x.cols(); ++f) {
      std::stable_sort(rows.begin(), rows.end(), [&](Index a, Index b) { return x(a, f) < x(b, f); });
      double l0 = 0.0, l1 = 0.0;
      for (long k = 0; k + 1 < n; ++k) {
        const Index i = rows[static_cast<std::size_t>(k)];
        (y[static_cast<std::size_t>(i)] ? l1 : l0) += y[static_cast<std::size_t>(i)] ? w1 : w0;
        const double lo = x(i, f), hi = x(rows[static_cast<std::size_t>(k + 1)], f);
        if (!(hi > lo)) continue;
        const long left = k + 1;
        if (left < params.min_leaf || n - left < params.min_leaf) continue;
        const double r0 = c0 - l0, r1 = c1 - l1;
        const double child = ((l0 + l1) * gini_impurity(l0, l1) + (r0 + r1) * gini_impurity(r0, r1)) / weight;
        const double gain = parent - child;
        if (best.feature < 0 || gain > best.gain + kGainTol) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid > lo)) mid = hi;
          best = {f, mid, gain};
        }
      }
    }
    return best;
  }

  TreeNode grow(const std::vector<Index>& rows, int depth) const {
    TreeNode node;
    fill_counts(node, rows);
    if (depth >= params.max_depth || node.n0 == 0 || node.n1 == 0) return node;
    if (node.records < 2 * params.min_leaf) return node;
    const Split s = best_split(node, rows);
    if (s.feature < 0 || s.gain < params.min_split_gain) return node;
    std::vector<Index> left, right;
    for (Index i : rows) (x(i, s.feature) < s.threshold ? left : right).push_back(i);
    node.feature = s.feature;
    node.feature_name = names[static_cast<std::size_t>(s.feature)];
    node.threshold = s.threshold;
    node.children.push_back(grow(left, depth + 1));
    node.children.push_back(grow(right, depth + 1));
    return node;
  }
};

const TreeNode& route(const TreeNode& t, const std::function<double(const TreeNode&)>& value) {
  const TreeNode* node = &t;
  while (!node->is_leaf()) node = &node->children[value(*node) < node->threshold ? 0 : 1];
  return *node;
}

}  // namespace

TreeNode grow_tree(const Matrix& features, const std::vector<int>& labels,
                   const std::vector<std::string>& feature_names, const TreeParams& params) {
  params.validate();
  if (features.rows() == 0) throw std::invalid_argument("grow_tree: no rows");
  if (static_cast<Index>(labels.size()) != features.rows()) throw std::invalid_argument("grow_tree: one label per row required");
  if (static_cast<Index>(feature_names.size()) != features.cols()) throw std::invalid_argument("grow_tree: one name per feature required");
  for (int v : labels)
    if (v != 0 && v != 1) throw std::invalid_argument("grow_tree: labels must be 0 or 1");
  if (!features.allFinite()) throw std::invalid_argument("grow_tree: features must be finite");

  Grower g{features, labels, feature_names, params};
  if (params.class_weights) std::tie(g.w0, g.w1) = *params.class_weights;
  g.total = static_cast<long>(features.rows());
  std::vector<Index> rows(static_cast<std::size_t>(features.rows()));
  std::iota(rows.begin(), rows.end(), Index{0});
  return g.grow(rows, 0);
}

TreePrediction predict_tree(const TreeNode& t, const Vector& row) {
  const TreeNode& leaf = route(t, [&](const TreeNode& n) {
    if (n.feature >= row.size()) throw std::invalid_argument("row lacks feature '" + n.feature_name + "'");
    return row(n.feature);
  });
  return {leaf.prediction, leaf.proportion};
}

TreePrediction predict_tree(const TreeNode& t, const std::map<std::string, double>& row) {
  const TreeNode& leaf = route(t, [&](const TreeNode& n) {
    auto it = row.find(n.feature_name);
    if (it == row.end()) throw std::invalid_argument("row lacks feature '" + n.feature_name + "'");
    return it->second;
  });
  return {leaf.prediction, leaf.proportion};
}

nlohmann::json tree_to_json(const TreeNode& t) {
  nlohmann::json j;
  j["n0"] = t.n0;
  j["n1"] = t.n1;
  j["prediction"] = t.prediction;
  j["proportion"] = t.proportion;
  j["records"] = t.records;
  j["total_records"] = t.total_records;
  if (!t.is_leaf()) {
    j["feature"] = t.feature_name;
    j["feature_index"] = t.feature;
    j["threshold"] = t.threshold;
    j["left"] = tree_to_json(t.children[0]);
    j["right"] = tree_to_json(t.children[1]);
  }
  return j;
}

TreeNode tree_from_json(const nlohmann::json& j) {
  TreeNode t;
  t.n0 = j.at("n0").get<long>();
  t.n1 = j.at("n1").get<long>();
  t.prediction = j.at("prediction").get<int>();
  t.proportion = j.at("proportion").get<double>();
  t.records = j.at("records").get<long>();
  t.total_records = j.at("total_records").get<long>();
  if (j.contains("left")) {
    t.feature_name = j.at("feature").get<std::string>();
    t.feature = j.at("feature_index").get<Index>();
    t.threshold = j.at("threshold").get<double>();
    t.children.push_back(tree_from_json(j.at("left")));
    t.children.push_back(tree_from_json(j.at("right")));
  }
  return t;
}

namespace {

std::string percent(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * f);
  return buf;
}

void render(const TreeNode& t, const std::string& rule, int indent, std::string& out) {
  out.append(static_cast<std::size_t>(2 * indent), ' ');
  out += rule;
  out += ": n0=" + std::to_string(t.n0) + " n1=" + std::to_string(t.n1);
  out += " predict " + std::to_string(t.prediction) + " (" + percent(t.proportion) + ")";
  out += " records " + percent(t.record_fraction());
  if (t.is_leaf()) out += " *";
  out.push_back('\n');
  if (t.is_leaf()) return;
  const std::string thr = format_double(t.threshold);
  render(t.children[0], t.feature_name + " < " + thr, indent + 1, out);
  render(t.children[1], t.feature_name + " >= " + thr, indent + 1, out);
}

}  // namespace

std::string tree_to_text(const TreeNode& t) {
  std::string out;
  render(t, "root", 0, out);
  return out;
}

}  // namespace extrapolmv
