#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ads/linalg.hpp"
#include "ads/sparse.hpp"

namespace ads {

struct TrainConfig {
  int natoms = 64;
  int levels = 2;
  int iters_level1 = 50;
  int iters_other = 10;
  double alpha = 1.0 / 40.0;
  std::uint64_t seed = 0;

  /// Throws ContractViolation when a field is out of range.
  void validate() const;
};

/// Pairwise class similarity |<eta_i, eta_j>|; symmetric with a unit diagonal.
struct AffinityMatrix {
  Matrix values;
  int classes() const { return static_cast<int>(values.rows()); }
  double operator()(int i, int j) const { return values(i, j); }
};

/// Objective |Y - D X|_F^2 recorded after each assignment step.
struct KsvdTrace {
  std::vector<double> objective;
};

/// K-SVD restricted to one atom per sample. Atoms start as K distinct random
/// (nonzero) columns of Y; atoms left without samples are re-seeded with the
/// worst-approximated column.
/// Throws InsufficientData when Y has fewer than K columns.
FlatDictionary ksvd1(const Matrix& y, int natoms, int iters, std::uint64_t seed,
                     KsvdTrace* trace = nullptr);

struct ResidualSplit {
  std::vector<int> assignment;                  // selected atom per column
  Matrix residuals;                             // y - <y,d_k> d_k, column-aligned with Y
  std::vector<std::vector<Eigen::Index>> members;  // columns per atom, ascending

  Matrix set(int atom) const;
};

/// Assigns each column to its mp1 atom and splits the residuals by atom.
ResidualSplit split_residuals(const Matrix& y, const FlatDictionary& dict);

/// Sample bookkeeping produced while growing a structure.
struct LevelAudit {
  struct Consumer {
    int node = 0;  // tree node id, -1 for the merged dictionary
    std::vector<Eigen::Index> samples;
  };
  int level = 1;
  std::vector<Consumer> consumers;
  std::vector<Eigen::Index> dead_ended;
};

struct StructureAudit {
  std::vector<LevelAudit> levels;
};

/// Grows levels 2..cfg.levels below a trained first-level dictionary.
/// Residual sets with at least K members get their own child dictionary;
/// the rest, together with the residuals of the previous merged dictionary,
/// are pooled into the merged dictionary of the level when the pool itself
/// reaches K samples.
MultilevelDictionary learn_structure(const Matrix& yc, const FlatDictionary& first_level,
                                     const TrainConfig& cfg, int class_id = 0,
                                     StructureAudit* audit = nullptr);

/// Unit direction of maximum energy of the mean-removed samples.
/// Throws DegenerateInput when every column is constant.
Vector class_representative(const Matrix& raw);

AffinityMatrix affinity(std::span<const Vector> representatives);

/// Number of counter samples to draw from each class when updating an atom
/// of class c. Zero for c itself.
std::vector<Eigen::Index> counter_quotas(int c, const AffinityMatrix& s,
                                         std::span<const Eigen::Index> class_sizes);

/// Samples of the other classes most correlated with `atom`, per quota.
Matrix counter_samples(const Vector& atom, int c, const AffinityMatrix& s,
                       std::span<const Matrix> classes);

/// Top eigenvector of  YcR YcR^T - lambda Ycn Ycn^T  with
/// lambda = alpha |YcR| / |Ycn|. With no counter samples this is exactly
/// dominant_singular_dir(YcR).
Vector discriminative_update(const Matrix& ycr, const Matrix& ycn, double alpha);

/// Seed used for class `class_index` by train_class.
std::uint64_t class_seed(std::uint64_t seed, int class_index);

/// Discriminative first level followed by learn_structure, for class c.
/// `classes` hold the preprocessed samples, `raw_classes` the unprocessed
/// ones used for the affinity matrix.
MultilevelDictionary train_class(int c, std::span<const Matrix> classes,
                                 std::span<const Matrix> raw_classes, const TrainConfig& cfg);
MultilevelDictionary train_class(int c, std::span<const Matrix> classes, const AffinityMatrix& s,
                                 const TrainConfig& cfg, KsvdTrace* trace = nullptr);

/// Affinity computed once from raw samples, then every class trained
/// (concurrently when hardware allows).
std::vector<MultilevelDictionary> train_all(std::span<const Matrix> classes,
                                            std::span<const Matrix> raw_classes,
                                            const TrainConfig& cfg,
                                            std::vector<double>* seconds = nullptr);

}  // namespace ads
