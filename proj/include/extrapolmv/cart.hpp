#pragma once

#include "extrapolmv/common.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace extrapolmv {

/// A node of a binary classification tree. Internal nodes send rows with
/// feature value < threshold to children[0] and the rest to children[1].
struct TreeNode {
  Index feature = -1;  // -1 for leaves
  std::string feature_name;
  double threshold = 0.0;
  long n0 = 0;
  long n1 = 0;
  int prediction = 0;
  double proportion = 1.0;  // share of the node's records in the predicted class
  long records = 0;         // n0 + n1
  long total_records = 0;   // records at the root
  std::vector<TreeNode> children;

  bool is_leaf() const { return children.empty(); }
  double record_fraction() const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
  bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
  int max_depth = 5;
  long min_leaf = 20;
  double min_split_gain = 1e-4;
  /// Weights for classes 0 and 1 in impurity and majority votes.
  std::optional<std::pair<double, double>> class_weights;

  void validate() const;
};

/// 1 - p0^2 - p1^2 for weighted class totals.
double gini_impurity(double w0, double w1);

/// Greedy Gini CART. Candidate thresholds are midpoints between consecutive
/// distinct values; equal gains keep the lowest feature index, then the
/// smallest threshold. Majority ties predict class 0.
TreeNode grow_tree(const Matrix& features, const std::vector<int>& labels,
                   const std::vector<std::string>& feature_names, const TreeParams& params = {});

struct TreePrediction {
  int label = 0;
  double proportion = 1.0;
};

/// Routes a row by feature index. Throws if the row is too short.
TreePrediction predict_tree(const TreeNode& t, const Vector& row);
/// Routes a row by feature name. Throws if a referenced feature is absent.
TreePrediction predict_tree(const TreeNode& t, const std::map<std::string, double>& row);

nlohmann::json tree_to_json(const TreeNode& t);
TreeNode tree_from_json(const nlohmann::json& j);

/// Indented rendering: split rule, class counts, predicted class share and
/// record share per node; leaves are marked with '*'.
std::string tree_to_text(const TreeNode& t);

}  // namespace extrapolmv
