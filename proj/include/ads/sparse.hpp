#pragma once

#include <optional>
#include <vector>

#include "ads/linalg.hpp"

namespace ads {

/// Dictionary of unit-norm atoms stored as the columns of a dim x K matrix.
class FlatDictionary {
 public:
  FlatDictionary() = default;
  /// Throws ContractViolation unless every column has unit norm within 1e-12.
  explicit FlatDictionary(Matrix atoms);

  int dim() const { return static_cast<int>(atoms_.rows()); }
  int size() const { return static_cast<int>(atoms_.cols()); }
  const Matrix& atoms() const { return atoms_; }
  auto atom(int k) const { return atoms_.col(k); }

  friend bool operator==(const FlatDictionary& a, const FlatDictionary& b) {
    return a.atoms_.rows() == b.atoms_.rows() && a.atoms_.cols() == b.atoms_.cols() &&
           a.atoms_ == b.atoms_;
  }

 private:
  Matrix atoms_;
};

struct MpStep {
  int index = 0;
  double coeff = 0.0;
};

/// Matching pursuit with one atom: argmax_k |<r, d_k>|, ties to the smallest k.
MpStep mp1(const Vector& r, const FlatDictionary& dict);

/// One dictionary of the tree. Level 1 is the root.
struct DictionaryNode {
  int level = 1;
  FlatDictionary dictionary;
  std::vector<int> children;  // node id per atom, -1 where the branch ends
};

/// Per-class multilevel dictionary: a tree of complete dictionaries grown
/// from the root, plus at most one "merged" dictionary per level collecting
/// the branches that had too few samples to continue.
class MultilevelDictionary {
 public:
  MultilevelDictionary() = default;
  MultilevelDictionary(int class_id, int levels, FlatDictionary root);

  /// Attaches `dict` below atom `atom` of node `parent`; returns the new node id.
  int add_child(int parent, int atom, FlatDictionary dict);
  void set_merged(int level, FlatDictionary dict);

  int class_id() const { return class_id_; }
  int levels() const { return levels_; }
  int dim() const { return nodes_.front().dictionary.dim(); }
  int atoms_per_dictionary() const { return nodes_.front().dictionary.size(); }

  const FlatDictionary& root() const { return nodes_.front().dictionary; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const DictionaryNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  int child(int node, int atom) const;
  const FlatDictionary* merged(int level) const;
  int merged_count() const;

  friend bool operator==(const MultilevelDictionary&, const MultilevelDictionary&);

 private:
  int class_id_ = 0;
  int levels_ = 1;
  std::vector<DictionaryNode> nodes_;
  std::vector<std::optional<FlatDictionary>> merged_;  // indexed by level
};

bool operator==(const MultilevelDictionary& a, const MultilevelDictionary& b);

struct PathStep {
  int level = 1;
  int node = 0;  // tree node id, or -1 for the merged dictionary of `level`
  int atom = 0;
  double coeff = 0.0;
};

struct SparsePath {
  std::vector<PathStep> steps;
  Vector residual;
  double residual_norm_sq = 0.0;
};

/// Descends the structure selecting one atom per level, up to `sparsity`
/// atoms. A missing child sends the path onto the merged chain, where it
/// stays; with neither available the path ends early.
SparsePath decompose(const Vector& y, const MultilevelDictionary& dict, int sparsity);

/// |y - sum_l x_l d_l|^2 for the decomposed sample.
double recon_error(const SparsePath& path);

/// recon_error / |y|^2, defined as 0 for the zero vector.
double norm_error(const Vector& y, const SparsePath& path);

}  // namespace ads
