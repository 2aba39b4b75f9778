#include "ads/sparse.hpp"

#include <cmath>
#include <string>

#include "ads/error.hpp"

namespace ads {

FlatDictionary::FlatDictionary(Matrix atoms) : atoms_(std::move(atoms)) {
  if (!atoms_.allFinite()) throw ContractViolation("FlatDictionary: non-finite atom entries");
  for (Eigen::Index k = 0; k < atoms_.cols(); ++k) {
    if (std::abs(atoms_.col(k).norm() - 1.0) > 1e-12) {
      throw ContractViolation("FlatDictionary: atom " + std::to_string(k) +
                              " does not have unit norm");
    }
  }
}

MpStep mp1(const Vector& r, const FlatDictionary& dict) {
  if (r.size() != dict.dim()) throw ContractViolation("mp1: dimension mismatch");
  const Vector corr = dict.atoms().transpose() * r;
  MpStep best{0, corr.size() > 0 ? corr[0] : 0.0};
  for (Eigen::Index k = 1; k < corr.size(); ++k) {
    if (std::abs(corr[k]) > std::abs(best.coeff)) best = {static_cast<int>(k), corr[k]};
  }
  return best;
}

MultilevelDictionary::MultilevelDictionary(int class_id, int levels, FlatDictionary root)
    : class_id_(class_id), levels_(levels) {
  if (levels < 1) throw ContractViolation("MultilevelDictionary: levels must be >= 1");
  if (root.size() < 1) throw ContractViolation("MultilevelDictionary: empty root dictionary");
  const int k = root.size();
  nodes_.push_back({1, std::move(root), std::vector<int>(static_cast<std::size_t>(k), -1)});
  merged_.resize(static_cast<std::size_t>(levels) + 1);
}

int MultilevelDictionary::add_child(int parent, int atom, FlatDictionary dict) {
  if (parent < 0 || parent >= node_count()) {
    throw ContractViolation("add_child: unknown parent node");
  }
  DictionaryNode& p = nodes_[static_cast<std::size_t>(parent)];
  if (atom < 0 || atom >= p.dictionary.size()) throw ContractViolation("add_child: bad atom index");
  if (p.children[static_cast<std::size_t>(atom)] >= 0) {
    throw ContractViolation("add_child: atom already has a child");
  }
  if (p.level + 1 > levels_) throw ContractViolation("add_child: exceeds structure depth");
  if (dict.size() != atoms_per_dictionary() || dict.dim() != dim()) {
    throw ContractViolation("add_child: dictionaries must be complete and share dimension");
  }
  const int id = node_count();
  const int level = p.level + 1;
  p.children[static_cast<std::size_t>(atom)] = id;
  const int k = dict.size();
  nodes_.push_back({level, std::move(dict), std::vector<int>(static_cast<std::size_t>(k), -1)});
  return id;
}

void MultilevelDictionary::set_merged(int level, FlatDictionary dict) {
  if (level < 2 || level > levels_) throw ContractViolation("set_merged: level out of range");
  if (dict.size() != atoms_per_dictionary() || dict.dim() != dim()) {
    throw ContractViolation("set_merged: dictionaries must be complete and share dimension");
  }
  merged_[static_cast<std::size_t>(level)] = std::move(dict);
}

int MultilevelDictionary::child(int node, int atom) const {
  return nodes_.at(static_cast<std::size_t>(node)).children.at(static_cast<std::size_t>(atom));
}

const FlatDictionary* MultilevelDictionary::merged(int level) const {
  if (level < 0 || level >= static_cast<int>(merged_.size())) return nullptr;
  const auto& m = merged_[static_cast<std::size_t>(level)];
  return m ? &*m : nullptr;
}

int MultilevelDictionary::merged_count() const {
  int n = 0;
  for (const auto& m : merged_) n += m.has_value();
  return n;
}

namespace {

// Node ids depend on insertion order, so trees are compared by shape.
bool same_subtree(const MultilevelDictionary& a, int na, const MultilevelDictionary& b, int nb) {
  const DictionaryNode& x = a.node(na);
  const DictionaryNode& y = b.node(nb);
  if (x.level != y.level || !(x.dictionary == y.dictionary) || x.children.size() != y.children.size()) {
    return false;
  }
  for (std::size_t k = 0; k < x.children.size(); ++k) {
    if ((x.children[k] < 0) != (y.children[k] < 0)) return false;
    if (x.children[k] >= 0 && !same_subtree(a, x.children[k], b, y.children[k])) return false;
  }
  return true;
}

}  // namespace

bool operator==(const MultilevelDictionary& a, const MultilevelDictionary& b) {
  if (a.class_id_ != b.class_id_ || a.levels_ != b.levels_ || a.merged_ != b.merged_ ||
      a.nodes_.size() != b.nodes_.size()) {
    return false;
  }
  return same_subtree(a, 0, b, 0);
}

SparsePath decompose(const Vector& y, const MultilevelDictionary& dict, int sparsity) {
  if (y.size() != dict.dim()) throw ContractViolation("decompose: dimension mismatch");
  if (sparsity < 1) throw ContractViolation("decompose: sparsity must be >= 1");
  SparsePath path;
  path.residual = y;
  int node = 0;
  int prev_atom = -1;
  bool on_merged = false;
  for (int level = 1; level <= sparsity; ++level) {
    const FlatDictionary* current = nullptr;
    if (level == 1) {
      current = &dict.root();
    } else if (!on_merged && dict.child(node, prev_atom) >= 0) {
      node = dict.child(node, prev_atom);
      current = &dict.node(node).dictionary;
    } else if (const FlatDictionary* m = dict.merged(level)) {
      on_merged = true;
      node = -1;
      current = m;
    } else {
      break;
    }
    const MpStep step = mp1(path.residual, *current);
    path.residual -= step.coeff * current->atom(step.index);
    path.steps.push_back({level, node, step.index, step.coeff});
    prev_atom = step.index;
  }
  path.residual_norm_sq = path.residual.squaredNorm();
  return path;
}

double recon_error(const SparsePath& path) { return path.residual_norm_sq; }

double norm_error(const Vector& y, const SparsePath& path) {
  const double energy = y.squaredNorm();
  if (energy == 0.0) return 0.0;
  return path.residual_norm_sq / energy;
}

}  // namespace ads
