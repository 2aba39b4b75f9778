#include "ads/dictlearn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <string>

#include "ads/error.hpp"
#include "ads/parallel.hpp"
#include "ads/rng.hpp"

namespace ads {

void TrainConfig::validate() const {
  if (natoms < 1) throw ContractViolation("TrainConfig: natoms must be >= 1");
  if (levels < 1) throw ContractViolation("TrainConfig: levels must be >= 1");
  if (iters_level1 < 0 || iters_other < 0) {
    throw ContractViolation("TrainConfig: iteration counts must be >= 0");
  }
  if (!(alpha > 0.0)) throw ContractViolation("TrainConfig: alpha must be > 0");
}

namespace {

Matrix gather(const Matrix& y, std::span<const Eigen::Index> cols) {
  Matrix out(y.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = y.col(cols[i]);
  return out;
}

// Indices of the n largest scores (ties to the smaller index), ascending.
std::vector<Eigen::Index> select_top(const Vector& scores, Eigen::Index n) {
  const Eigen::Index total = scores.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  n = std::clamp<Eigen::Index>(n, 0, total);
  if (n < total) {
    std::nth_element(idx.begin(), idx.begin() + n, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return a < b;
    });
    idx.resize(static_cast<std::size_t>(n));
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Supplies Gram matrices of counter samples during the discriminative sweep.
class CounterSource {
 public:
  CounterSource(int c, std::span<const Matrix> classes, const AffinityMatrix& s)
      : classes_(classes) {
    std::vector<Eigen::Index> sizes;
    for (const Matrix& m : classes) sizes.push_back(m.cols());
    quotas_ = counter_quotas(c, s, sizes);
    for (int j = 0; j < static_cast<int>(classes.size()); ++j) {
      if (quotas_[static_cast<std::size_t>(j)] > 0) others_.push_back(j);
    }
    correlations_.resize(classes.size());
    full_grams_.resize(classes.size());
  }

  bool empty() const { return others_.empty(); }

  // Atoms only change at their own update, so correlations taken with the
  // dictionary at the start of a sweep stay valid for every atom in it.
  void begin_iteration(const Matrix& dict) {
    for (int j : others_) {
      correlations_[static_cast<std::size_t>(j)] =
          (classes_[static_cast<std::size_t>(j)].transpose() * dict).cwiseAbs();
    }
  }

  // Gram matrix of the counter samples for atom k; returns their number.
  Eigen::Index gram_for(int k, Matrix& out) {
    const Eigen::Index dim = classes_.front().rows();
    out = Matrix::Zero(dim, dim);
    Eigen::Index total = 0;
    for (int j : others_) {
      const auto ju = static_cast<std::size_t>(j);
      const Matrix& y = classes_[ju];
      const Eigen::Index n = quotas_[ju];
      const Eigen::Index size = y.cols();
      if (n >= size) {
        out += full_gram(j);
      } else {
        const Vector scores = correlations_[ju].col(k);
        const std::vector<Eigen::Index> chosen = select_top(scores, n);
        if (2 * n > size) {
          // Cheaper to subtract the unselected samples from the full Gram.
          std::vector<Eigen::Index> rest;
          rest.reserve(static_cast<std::size_t>(size - n));
          std::size_t p = 0;
          for (Eigen::Index i = 0; i < size; ++i) {
            if (p < chosen.size() && chosen[p] == i) {
              ++p;
            } else {
              rest.push_back(i);
            }
          }
          out += full_gram(j) - gram(gather(y, rest));
        } else {
          out += gram(gather(y, chosen));
        }
      }
      total += n;
    }
    return total;
  }

 private:
  const Matrix& full_gram(int j) {
    auto& g = full_grams_[static_cast<std::size_t>(j)];
    if (!g) g = gram(classes_[static_cast<std::size_t>(j)]);
    return *g;
  }

  std::span<const Matrix> classes_;
  std::vector<Eigen::Index> quotas_;
  std::vector<int> others_;
  std::vector<Matrix> correlations_;
  std::vector<std::optional<Matrix>> full_grams_;
};

Matrix initial_atoms(const Matrix& y, int natoms, Rng& rng) {
  if (y.cols() < natoms) {
    throw InsufficientData("dictionary learning needs at least " + std::to_string(natoms) +
                           " samples, got " + std::to_string(y.cols()));
  }
  Matrix d(y.rows(), natoms);
  int filled = 0;
  for (std::size_t idx : rng.permutation(static_cast<std::size_t>(y.cols()))) {
    if (filled == natoms) break;
    const double norm = y.col(static_cast<Eigen::Index>(idx)).norm();
    if (norm > 0.0) d.col(filled++) = y.col(static_cast<Eigen::Index>(idx)) / norm;
  }
  // Fewer nonzero samples than atoms: complete with canonical basis vectors.
  for (int k = filled; k < natoms; ++k) {
    d.col(k) = Vector::Unit(y.rows(), k % y.rows());
  }
  return d;
}

struct Assignment {
  std::vector<int> atom;
  Vector coeff;
  double objective = 0.0;
};

Assignment assign(const Matrix& y, const Matrix& d, const Vector& energy) {
  const Matrix corr = d.transpose() * y;
  Assignment a;
  a.atom.resize(static_cast<std::size_t>(y.cols()));
  a.coeff.resize(y.cols());
  for (Eigen::Index i = 0; i < y.cols(); ++i) {
    const auto col = corr.col(i);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < col.size(); ++k) {
      if (std::abs(col[k]) > std::abs(col[best])) best = k;
    }
    a.atom[static_cast<std::size_t>(i)] = static_cast<int>(best);
    a.coeff[i] = col[best];
  }
  a.objective = std::max(0.0, (energy - a.coeff.cwiseAbs2()).sum());
  return a;
}

// Shared alternating loop for reconstructive (no counter source) and
// discriminative first-level learning.
FlatDictionary learn_flat(const Matrix& y, int natoms, int iters, std::uint64_t seed,
                          double alpha, CounterSource* counter, KsvdTrace* trace) {
  Rng rng(seed);
  Matrix d = initial_atoms(y, natoms, rng);
  const Vector energy = y.colwise().squaredNorm().transpose();
  if (counter && counter->empty()) counter = nullptr;
  Matrix counter_gram;

  for (int it = 0; it < iters; ++it) {
    const Assignment a = assign(y, d, energy);
    if (trace) trace->objective.push_back(a.objective);

    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(natoms));
    for (Eigen::Index i = 0; i < y.cols(); ++i) {
      members[static_cast<std::size_t>(a.atom[static_cast<std::size_t>(i)])].push_back(i);
    }
    Vector error = energy - a.coeff.cwiseAbs2();
    if (counter) counter->begin_iteration(d);

    for (int k = 0; k < natoms; ++k) {
      const auto& mine = members[static_cast<std::size_t>(k)];
      if (mine.empty()) {
        Eigen::Index worst = 0;
        const double worst_error = error.maxCoeff(&worst);
        if (worst_error > 0.0) {
          d.col(k) = y.col(worst) / y.col(worst).norm();
          error[worst] = -1.0;
        }
        continue;
      }
      const Matrix ycr = gather(y, mine);
      if (!(ycr.squaredNorm() > 0.0)) continue;
      Eigen::Index ncounter = 0;
      if (counter) ncounter = counter->gram_for(k, counter_gram);
      if (ncounter > 0) {
        const double lambda = alpha * static_cast<double>(ycr.cols()) / static_cast<double>(ncounter);
        d.col(k) = max_eigvec(gram(ycr) - lambda * counter_gram).vector;
      } else {
        d.col(k) = dominant_singular_dir(ycr);
      }
    }
  }
  if (trace) trace->objective.push_back(assign(y, d, energy).objective);
  return FlatDictionary(std::move(d));
}

std::uint64_t structure_seed(std::uint64_t seed, int level, int node, int atom) {
  std::uint64_t s = derive_seed(seed, 0x5eedULL + static_cast<std::uint64_t>(level));
  s = derive_seed(s, static_cast<std::uint64_t>(node + 1));
  return derive_seed(s, static_cast<std::uint64_t>(atom + 1));
}

}  // namespace

FlatDictionary ksvd1(const Matrix& y, int natoms, int iters, std::uint64_t seed,
                     KsvdTrace* trace) {
  if (natoms < 1) throw ContractViolation("ksvd1: natoms must be >= 1");
  return learn_flat(y, natoms, iters, seed, 1.0, nullptr, trace);
}

Matrix ResidualSplit::set(int atom) const {
  return gather(residuals, members.at(static_cast<std::size_t>(atom)));
}

ResidualSplit split_residuals(const Matrix& y, const FlatDictionary& dict) {
  if (y.rows() != dict.dim()) throw ContractViolation("split_residuals: dimension mismatch");
  const Matrix corr = dict.atoms().transpose() * y;
  ResidualSplit out;
  out.assignment.resize(static_cast<std::size_t>(y.cols()));
  out.residuals.resize(y.rows(), y.cols());
  out.members.resize(static_cast<std::size_t>(dict.size()));
  for (Eigen::Index i = 0; i < y.cols(); ++i) {
    const auto col = corr.col(i);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < col.size(); ++k) {
      if (std::abs(col[k]) > std::abs(col[best])) best = k;
    }
    out.assignment[static_cast<std::size_t>(i)] = static_cast<int>(best);
    out.residuals.col(i) = y.col(i) - col[best] * dict.atom(static_cast<int>(best));
    out.members[static_cast<std::size_t>(best)].push_back(i);
  }
  return out;
}

MultilevelDictionary learn_structure(const Matrix& yc, const FlatDictionary& first_level,
                                     const TrainConfig& cfg, int class_id,
                                     StructureAudit* audit) {
  cfg.validate();
  if (yc.rows() != first_level.dim()) {
    throw ContractViolation("learn_structure: dimension mismatch");
  }
  const int natoms = first_level.size();
  MultilevelDictionary structure(class_id, cfg.levels, first_level);

  // Samples consumed by one dictionary at the current level.
  struct Branch {
    int node;  // -1: merged dictionary
    std::vector<Eigen::Index> ids;
    Matrix data;
  };
  std::vector<Eigen::Index> all(static_cast<std::size_t>(yc.cols()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<Branch> frontier;
  frontier.push_back({0, all, yc});
  if (audit) {
    audit->levels.clear();
    audit->levels.push_back({1, {{0, all}}, {}});
  }

  for (int level = 2; level <= cfg.levels && !frontier.empty(); ++level) {
    struct ChildTask {
      int parent;
      int atom;
      std::vector<Eigen::Index> ids;
      Matrix data;
    };
    std::vector<ChildTask> tasks;
    std::vector<Eigen::Index> pool_ids;
    std::vector<Matrix> pool_parts;

    for (Branch& b : frontier) {
      const FlatDictionary& dict =
          b.node >= 0 ? structure.node(b.node).dictionary : *structure.merged(level - 1);
      const ResidualSplit split = split_residuals(b.data, dict);
      if (b.node < 0) {
        pool_ids.insert(pool_ids.end(), b.ids.begin(), b.ids.end());
        pool_parts.push_back(split.residuals);
        continue;
      }
      for (int k = 0; k < natoms; ++k) {
        const auto& mem = split.members[static_cast<std::size_t>(k)];
        if (mem.empty()) continue;
        std::vector<Eigen::Index> ids;
        ids.reserve(mem.size());
        for (Eigen::Index m : mem) ids.push_back(b.ids[static_cast<std::size_t>(m)]);
        if (static_cast<int>(mem.size()) >= natoms) {
          tasks.push_back({b.node, k, std::move(ids), split.set(k)});
        } else {
          pool_ids.insert(pool_ids.end(), ids.begin(), ids.end());
          pool_parts.push_back(split.set(k));
        }
      }
    }

    std::vector<std::optional<FlatDictionary>> trained(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t t) {
      trained[t] = ksvd1(tasks[t].data, natoms, cfg.iters_other,
                         structure_seed(cfg.seed, level, tasks[t].parent, tasks[t].atom));
    });

    std::vector<Branch> next;
    LevelAudit level_audit{level, {}, {}};
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const int id = structure.add_child(tasks[t].parent, tasks[t].atom, std::move(*trained[t]));
      if (audit) level_audit.consumers.push_back({id, tasks[t].ids});
      next.push_back({id, std::move(tasks[t].ids), std::move(tasks[t].data)});
    }

    if (static_cast<int>(pool_ids.size()) >= natoms) {
      Matrix pool(yc.rows(), static_cast<Eigen::Index>(pool_ids.size()));
      Eigen::Index offset = 0;
      for (const Matrix& part : pool_parts) {
        pool.middleCols(offset, part.cols()) = part;
        offset += part.cols();
      }
      structure.set_merged(level, ksvd1(pool, natoms, cfg.iters_other,
                                        structure_seed(cfg.seed, level, -1, -1)));
      if (audit) level_audit.consumers.push_back({-1, pool_ids});
      next.push_back({-1, std::move(pool_ids), std::move(pool)});
    } else if (audit) {
      level_audit.dead_ended = std::move(pool_ids);
    }
    if (audit) audit->levels.push_back(std::move(level_audit));
    frontier = std::move(next);
  }
  return structure;
}

Vector class_representative(const Matrix& raw) {
  if (raw.cols() < 1) throw ContractViolation("class_representative: no samples");
  Matrix centred = raw;
  centred.rowwise() -= raw.colwise().mean();
  if (!(centred.squaredNorm() > 1e-24 * std::max(1.0, raw.squaredNorm()))) {
    throw DegenerateInput("class_representative: all samples are constant");
  }
  return max_eigvec(gram(centred)).vector;
}

AffinityMatrix affinity(std::span<const Vector> reps) {
  const auto c = static_cast<Eigen::Index>(reps.size());
  AffinityMatrix s{Matrix::Identity(c, c)};
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = i + 1; j < c; ++j) {
      if (reps[static_cast<std::size_t>(i)].size() != reps[static_cast<std::size_t>(j)].size()) {
        throw ContractViolation("affinity: representatives differ in dimension");
      }
      const double v = std::min(
          1.0, std::abs(reps[static_cast<std::size_t>(i)].dot(reps[static_cast<std::size_t>(j)])));
      s.values(i, j) = v;
      s.values(j, i) = v;
    }
  }
  return s;
}

std::vector<Eigen::Index> counter_quotas(int c, const AffinityMatrix& s,
                                         std::span<const Eigen::Index> sizes) {
  const int nclasses = static_cast<int>(sizes.size());
  if (c < 0 || c >= nclasses || s.classes() != nclasses) {
    throw ContractViolation("counter_quotas: class index or affinity size mismatch");
  }
  std::vector<Eigen::Index> quotas(sizes.size(), 0);
  const bool equal = std::all_of(sizes.begin(), sizes.end(),
                                 [&](Eigen::Index n) { return n == sizes.front(); });
  if (equal) {
    for (int j = 0; j < nclasses; ++j) {
      if (j == c) continue;
      quotas[static_cast<std::size_t>(j)] = static_cast<Eigen::Index>(
          std::llround(s(j, c) * static_cast<double>(sizes[static_cast<std::size_t>(j)])));
    }
    return quotas;
  }
  // Unequal sizes: shares proportional to S_jc, total set by the mean class size.
  const double mean_size =
      static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), Eigen::Index{0})) / nclasses;
  double affinity_sum = 0.0;
  for (int j = 0; j < nclasses; ++j) {
    if (j != c) affinity_sum += s(j, c);
  }
  if (affinity_sum <= 0.0) return quotas;
  const double total = static_cast<double>(std::llround(affinity_sum * mean_size));
  for (int j = 0; j < nclasses; ++j) {
    if (j == c) continue;
    const auto n = static_cast<Eigen::Index>(std::llround(total * s(j, c) / affinity_sum));
    quotas[static_cast<std::size_t>(j)] = std::min(n, sizes[static_cast<std::size_t>(j)]);
  }
  return quotas;
}

Matrix counter_samples(const Vector& atom, int c, const AffinityMatrix& s,
                       std::span<const Matrix> classes) {
  std::vector<Eigen::Index> sizes;
  for (const Matrix& m : classes) sizes.push_back(m.cols());
  const std::vector<Eigen::Index> quotas = counter_quotas(c, s, sizes);
  const Eigen::Index total = std::accumulate(quotas.begin(), quotas.end(), Eigen::Index{0});
  Matrix out(atom.size(), total);
  Eigen::Index offset = 0;
  for (std::size_t j = 0; j < classes.size(); ++j) {
    if (quotas[j] == 0) continue;
    if (classes[j].rows() != atom.size()) {
      throw ContractViolation("counter_samples: dimension mismatch");
    }
    const Vector scores = (classes[j].transpose() * atom).cwiseAbs();
    const Matrix chosen = gather(classes[j], select_top(scores, quotas[j]));
    out.middleCols(offset, chosen.cols()) = chosen;
    offset += chosen.cols();
  }
  return out;
}

Vector discriminative_update(const Matrix& ycr, const Matrix& ycn, double alpha) {
  if (ycr.cols() < 1) {
    throw ContractViolation("discriminative_update: atom has no samples of its own class");
  }
  if (ycn.cols() == 0) return dominant_singular_dir(ycr);
  if (ycn.rows() != ycr.rows()) throw ContractViolation("discriminative_update: dimension mismatch");
  const double lambda = alpha * static_cast<double>(ycr.cols()) / static_cast<double>(ycn.cols());
  return max_eigvec(gram(ycr) - lambda * gram(ycn)).vector;
}

std::uint64_t class_seed(std::uint64_t seed, int class_index) {
  return derive_seed(seed, static_cast<std::uint64_t>(class_index));
}

MultilevelDictionary train_class(int c, std::span<const Matrix> classes, const AffinityMatrix& s,
                                 const TrainConfig& cfg, KsvdTrace* trace) {
  cfg.validate();
  if (c < 0 || c >= static_cast<int>(classes.size())) {
    throw ContractViolation("train_class: class index out of range");
  }
  TrainConfig own = cfg;
  own.seed = class_seed(cfg.seed, c);
  const Matrix& y = classes[static_cast<std::size_t>(c)];
  CounterSource counter(c, classes, s);
  const FlatDictionary first =
      learn_flat(y, cfg.natoms, cfg.iters_level1, own.seed, cfg.alpha, &counter, trace);
  return learn_structure(y, first, own, c);
}

MultilevelDictionary train_class(int c, std::span<const Matrix> classes,
                                 std::span<const Matrix> raw_classes, const TrainConfig& cfg) {
  if (raw_classes.size() != classes.size()) {
    throw ContractViolation("train_class: raw and processed class lists differ in length");
  }
  std::vector<Vector> reps;
  for (const Matrix& raw : raw_classes) reps.push_back(class_representative(raw));
  return train_class(c, classes, affinity(reps), cfg);
}

std::vector<MultilevelDictionary> train_all(std::span<const Matrix> classes,
                                            std::span<const Matrix> raw_classes,
                                            const TrainConfig& cfg,
                                            std::vector<double>* seconds) {
  if (raw_classes.size() != classes.size()) {
    throw ContractViolation("train_all: raw and processed class lists differ in length");
  }
  std::vector<Vector> reps(classes.size());
  parallel_for(classes.size(), [&](std::size_t j) { reps[j] = class_representative(raw_classes[j]); });
  const AffinityMatrix s = affinity(reps);
  std::vector<std::optional<MultilevelDictionary>> out(classes.size());
  std::vector<double> elapsed(classes.size(), 0.0);
  parallel_for(classes.size(), [&](std::size_t j) {
    const auto start = std::chrono::steady_clock::now();
    out[j] = train_class(static_cast<int>(j), classes, s, cfg);
    elapsed[j] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  if (seconds) *seconds = std::move(elapsed);
  std::vector<MultilevelDictionary> result;
  for (auto& d : out) result.push_back(std::move(*d));
  return result;
}

}  // namespace ads
