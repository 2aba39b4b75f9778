#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ads {

/// Per-pixel, per-class data costs, stored in (row, col, class) order.
class CostVolume {
 public:
  CostVolume() = default;
  CostVolume(int height, int width, int classes, double fill = 0.0);
  CostVolume(int height, int width, int classes, std::vector<double> costs);

  int height() const { return height_; }
  int width() const { return width_; }
  int classes() const { return classes_; }
  int pixels() const { return height_ * width_; }

  double operator()(int pixel, int label) const { return costs_[offset(pixel, label)]; }
  double& operator()(int pixel, int label) { return costs_[offset(pixel, label)]; }
  double at(int r, int c, int label) const { return (*this)(r * width_ + c, label); }
  double& at(int r, int c, int label) { return (*this)(r * width_ + c, label); }

  std::span<const double> data() const { return costs_; }

  friend bool operator==(const CostVolume&, const CostVolume&) = default;

 private:
  std::size_t offset(int pixel, int label) const {
    return static_cast<std::size_t>(pixel) * static_cast<std::size_t>(classes_) +
           static_cast<std::size_t>(label);
  }

  int height_ = 0;
  int width_ = 0;
  int classes_ = 0;
  std::vector<double> costs_;
};

/// Class index per pixel, row-major.
class LabelImage {
 public:
  LabelImage() = default;
  LabelImage(int height, int width, int fill = 0);
  LabelImage(int height, int width, std::vector<int> labels);

  int height() const { return height_; }
  int width() const { return width_; }
  int pixels() const { return height_ * width_; }

  int operator[](int pixel) const { return labels_[static_cast<std::size_t>(pixel)]; }
  int& operator[](int pixel) { return labels_[static_cast<std::size_t>(pixel)]; }
  int at(int r, int c) const { return (*this)[r * width_ + c]; }
  int& at(int r, int c) { return (*this)[r * width_ + c]; }

  std::span<const int> labels() const { return labels_; }

  friend bool operator==(const LabelImage&, const LabelImage&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<int> labels_;
};

/// Potts energy: sum_p cost(p, f_p) + u * #{4-neighbour pairs with f_p != f_q}.
double energy(const LabelImage& f, const CostVolume& cv, double u);

/// Per-pixel minimum-cost labelling (ties to the smaller class index).
LabelImage argmin_labels(const CostVolume& cv);

/// Directed network with nonnegative finite capacities.
class FlowNetwork {
 public:
  FlowNetwork(int nodes, int source, int sink);

  void add_arc(int from, int to, double capacity);
  int nodes() const { return static_cast<int>(head_.size()); }
  int source() const { return source_; }
  int sink() const { return sink_; }

  struct Result {
    double flow = 0.0;
    std::vector<bool> source_side;  // minimal source set of a minimum cut
  };

  /// Maximum flow (Dinic). Leaves the network unchanged.
  Result maxflow() const;

 private:
  struct Arc {
    int to;
    int next;
    double capacity;
  };
  int source_;
  int sink_;
  std::vector<int> head_;
  std::vector<Arc> arcs_;  // arcs 2i and 2i+1 are reverse of each other
};

/// Best labelling among all alpha-expansions of f (every pixel keeps f_p or
/// switches to alpha), by one minimum cut. Never increases the energy.
LabelImage expand(const LabelImage& f, int alpha, const CostVolume& cv, double u);

struct ExpansionResult {
  LabelImage labels;
  std::vector<double> energy_trace;  // initial energy, then after each move
  int cycles = 0;
};

/// Starts from argmin_labels and expands every label in a fresh random order
/// per cycle until a full cycle gives no strict energy decrease.
ExpansionResult alpha_expansion(const CostVolume& cv, double u, std::uint64_t seed);

struct Segment {
  int label = 0;
  std::vector<int> pixels;  // ascending pixel indices
};

/// 4-connected components of equal-label pixels, ordered by first pixel.
std::vector<Segment> segments(const LabelImage& f);

/// Removes segments by peeling: boundary pixels adopt the cheapest label
/// among their 4-neighbours outside the segment, repeated until the segment
/// is consumed. Segments smaller than `small` are always eroded, larger than
/// `big` never; in between an erosion is kept only if it strictly lowers
/// energy(., cv, u * lam). Smallest segments are treated first.
LabelImage alpha_erosion(const LabelImage& f, const CostVolume& cv, double u, double lam,
                         int small, int big);

/// Erosion of a single segment (pixel list) as used by alpha_erosion.
/// Returns f unchanged when the segment covers the whole image.
LabelImage erode_segment(const LabelImage& f, const Segment& segment, const CostVolume& cv);

/// Pixels whose (2 depth + 1)^2 window holds another label take the
/// cheapest label present in that window (current label wins ties).
LabelImage edge_erosion(const LabelImage& f, const CostVolume& cv, int depth);

/// Binary cost volume: "CVOL", H, W, C as u32 little-endian, then H*W*C
/// little-endian doubles in (row, col, class) order.
void write_cost_volume(const std::filesystem::path& path, const CostVolume& cv);
CostVolume read_cost_volume(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_cost_volume(const CostVolume& cv);
CostVolume decode_cost_volume(std::span<const std::uint8_t> bytes);

}  // namespace ads
