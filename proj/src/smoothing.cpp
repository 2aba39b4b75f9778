#include "ads/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <tuple>

#include "ads/bytes.hpp"
#include "ads/error.hpp"
#include "ads/rng.hpp"

namespace ads {

CostVolume::CostVolume(int height, int width, int classes, double fill)
    : height_(height), width_(width), classes_(classes) {
  if (height < 1 || width < 1 || classes < 1) {
    throw ContractViolation("CostVolume: dimensions must be positive");
  }
  costs_.assign(static_cast<std::size_t>(height) * width * classes, fill);
}

CostVolume::CostVolume(int height, int width, int classes, std::vector<double> costs)
    : height_(height), width_(width), classes_(classes), costs_(std::move(costs)) {
  if (height < 1 || width < 1 || classes < 1) {
    throw ContractViolation("CostVolume: dimensions must be positive");
  }
  if (costs_.size() != static_cast<std::size_t>(height) * width * classes) {
    throw ContractViolation("CostVolume: cost buffer size does not match dimensions");
  }
}

LabelImage::LabelImage(int height, int width, int fill) : height_(height), width_(width) {
  if (height < 1 || width < 1) throw ContractViolation("LabelImage: dimensions must be positive");
  labels_.assign(static_cast<std::size_t>(height) * width, fill);
}

LabelImage::LabelImage(int height, int width, std::vector<int> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
  if (height < 1 || width < 1) throw ContractViolation("LabelImage: dimensions must be positive");
  if (labels_.size() != static_cast<std::size_t>(height) * width) {
    throw ContractViolation("LabelImage: label buffer size does not match dimensions");
  }
}

namespace {

void check_dims(const LabelImage& f, const CostVolume& cv) {
  if (f.height() != cv.height() || f.width() != cv.width()) {
    throw ContractViolation("label image and cost volume dimensions differ");
  }
  for (int label : f.labels()) {
    if (label < 0 || label >= cv.classes()) {
      throw ContractViolation("label outside the cost volume's class range");
    }
  }
}

// Calls fn(p, q) once for every unordered 4-neighbour pair.
template <typename Fn>
void for_each_pair(int height, int width, Fn&& fn) {
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int p = r * width + c;
      if (c + 1 < width) fn(p, p + 1);
      if (r + 1 < height) fn(p, p + width);
    }
  }
}

// Calls fn(q) for each 4-neighbour q of pixel p.
template <typename Fn>
void for_each_neighbour(int p, int height, int width, Fn&& fn) {
  const int r = p / width;
  const int c = p % width;
  if (r > 0) fn(p - width);
  if (c > 0) fn(p - 1);
  if (c + 1 < width) fn(p + 1);
  if (r + 1 < height) fn(p + width);
}

}  // namespace

double energy(const LabelImage& f, const CostVolume& cv, double u) {
  check_dims(f, cv);
  double data = 0.0;
  for (int p = 0; p < f.pixels(); ++p) data += cv(p, f[p]);
  long discord = 0;
  for_each_pair(f.height(), f.width(), [&](int p, int q) { discord += f[p] != f[q]; });
  return data + u * static_cast<double>(discord);
}

LabelImage argmin_labels(const CostVolume& cv) {
  LabelImage f(cv.height(), cv.width());
  for (int p = 0; p < cv.pixels(); ++p) {
    int best = 0;
    for (int k = 1; k < cv.classes(); ++k) {
      if (cv(p, k) < cv(p, best)) best = k;
    }
    f[p] = best;
  }
  return f;
}

LabelImage expand(const LabelImage& f, int alpha, const CostVolume& cv, double u) {
  check_dims(f, cv);
  if (alpha < 0 || alpha >= cv.classes()) throw ContractViolation("expand: label out of range");
  if (u < 0.0) throw ContractViolation("expand: smoothing weight must be nonnegative");
  const int n = f.pixels();
  const int source = n;
  const int sink = n + 1;
  // Binary variable per pixel: 1 = switch to alpha (source side), 0 = keep.
  std::vector<double> switch_cost(static_cast<std::size_t>(n));
  std::vector<double> keep_cost(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    keep_cost[static_cast<std::size_t>(p)] = cv(p, f[p]);
    switch_cost[static_cast<std::size_t>(p)] = cv(p, alpha);
  }
  FlowNetwork net(n + 2, source, sink);
  for_each_pair(f.height(), f.width(), [&](int p, int q) {
    const double e00 = f[p] != f[q] ? u : 0.0;
    const double e01 = f[p] != alpha ? u : 0.0;  // p keeps, q switches
    const double e10 = alpha != f[q] ? u : 0.0;  // p switches, q keeps
    const double e11 = 0.0;
    // E = e00 + a x_p + b x_q + w x_p (1 - x_q)
    switch_cost[static_cast<std::size_t>(p)] += e11 - e01;
    switch_cost[static_cast<std::size_t>(q)] += e01 - e00;
    const double w = e10 + e01 - e00 - e11;
    if (w > 0.0) net.add_arc(p, q, w);
  });
  for (int p = 0; p < n; ++p) {
    const double d = switch_cost[static_cast<std::size_t>(p)] - keep_cost[static_cast<std::size_t>(p)];
    if (d > 0.0) {
      net.add_arc(p, sink, d);
    } else if (d < 0.0) {
      net.add_arc(source, p, -d);
    }
  }
  const FlowNetwork::Result cut = net.maxflow();
  LabelImage out = f;
  for (int p = 0; p < n; ++p) {
    if (cut.source_side[static_cast<std::size_t>(p)]) out[p] = alpha;
  }
  if (energy(out, cv, u) > energy(f, cv, u)) return f;
  return out;
}

ExpansionResult alpha_expansion(const CostVolume& cv, double u, std::uint64_t seed) {
  if (u < 0.0) throw ContractViolation("alpha_expansion: smoothing weight must be nonnegative");
  constexpr double kMinDecrease = 1e-12;
  constexpr int kMaxCycles = 1000;
  Rng rng(seed);
  ExpansionResult result;
  result.labels = argmin_labels(cv);
  double current = energy(result.labels, cv, u);
  result.energy_trace.push_back(current);
  std::vector<int> order(static_cast<std::size_t>(cv.classes()));
  for (int k = 0; k < cv.classes(); ++k) order[static_cast<std::size_t>(k)] = k;

  bool improved = true;
  while (improved && result.cycles < kMaxCycles) {
    improved = false;
    ++result.cycles;
    rng.shuffle(order);
    for (int alpha : order) {
      LabelImage candidate = expand(result.labels, alpha, cv, u);
      const double e = energy(candidate, cv, u);
      if (e < current - kMinDecrease) {
        result.labels = std::move(candidate);
        current = e;
        improved = true;
      }
      result.energy_trace.push_back(current);
    }
  }
  return result;
}

std::vector<Segment> segments(const LabelImage& f) {
  const int n = f.pixels();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Segment> out;
  std::vector<int> stack;
  for (int start = 0; start < n; ++start) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    Segment seg;
    seg.label = f[start];
    seen[static_cast<std::size_t>(start)] = true;
    stack.push_back(start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      seg.pixels.push_back(p);
      for_each_neighbour(p, f.height(), f.width(), [&](int q) {
        if (!seen[static_cast<std::size_t>(q)] && f[q] == seg.label) {
          seen[static_cast<std::size_t>(q)] = true;
          stack.push_back(q);
        }
      });
    }
    std::sort(seg.pixels.begin(), seg.pixels.end());
    out.push_back(std::move(seg));
  }
  return out;
}

LabelImage erode_segment(const LabelImage& f, const Segment& segment, const CostVolume& cv) {
  check_dims(f, cv);
  const int h = f.height();
  const int w = f.width();
  std::vector<bool> remaining(static_cast<std::size_t>(f.pixels()), false);
  for (int p : segment.pixels) remaining[static_cast<std::size_t>(p)] = true;
  if (static_cast<int>(segment.pixels.size()) == f.pixels()) return f;

  LabelImage out = f;
  std::vector<int> left = segment.pixels;
  std::vector<std::pair<int, int>> peeled;
  while (!left.empty()) {
    peeled.clear();
    std::vector<int> still;
    for (int p : left) {
      int best = -1;
      for_each_neighbour(p, h, w, [&](int q) {
        if (remaining[static_cast<std::size_t>(q)]) return;
        const int candidate = out[q];
        if (best < 0 || cv(p, candidate) < cv(p, best) ||
            (cv(p, candidate) == cv(p, best) && candidate < best)) {
          best = candidate;
        }
      });
      if (best >= 0) {
        peeled.emplace_back(p, best);
      } else {
        still.push_back(p);
      }
    }
    if (peeled.empty()) return f;  // unreachable for a proper sub-region of the grid
    for (auto [p, label] : peeled) {
      out[p] = label;
      remaining[static_cast<std::size_t>(p)] = false;
    }
    left = std::move(still);
  }
  return out;
}

LabelImage alpha_erosion(const LabelImage& f, const CostVolume& cv, double u, double lam,
                         int small, int big) {
  check_dims(f, cv);
  if (small > big) throw ContractViolation("alpha_erosion: small threshold exceeds big threshold");
  constexpr double kMinDecrease = 1e-12;
  const double weight = u * lam;
  const int h = f.height();
  const int w = f.width();
  LabelImage labels = f;
  // A rejected segment is identified by (label, first pixel, size).
  std::set<std::tuple<int, int, std::size_t>> rejected;
  std::vector<bool> touched(static_cast<std::size_t>(f.pixels()));
  std::vector<bool> inside(static_cast<std::size_t>(f.pixels()), false);

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Segment> segs = segments(labels);
    if (segs.size() <= 1) break;
    std::stable_sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) {
      return a.pixels.size() < b.pixels.size();
    });
    std::fill(touched.begin(), touched.end(), false);

    for (const Segment& seg : segs) {
      const std::size_t size = seg.pixels.size();
      if (size > static_cast<std::size_t>(big)) break;
      // Segments next to an erosion made in this pass may have merged; they
      // are revisited on the next pass.
      bool stale = false;
      for (int p : seg.pixels) {
        if (touched[static_cast<std::size_t>(p)]) stale = true;
        for_each_neighbour(p, h, w, [&](int q) { stale = stale || touched[static_cast<std::size_t>(q)]; });
        if (stale) break;
      }
      if (stale) {
        changed = true;
        continue;
      }
      const auto key = std::make_tuple(seg.label, seg.pixels.front(), size);
      if (rejected.contains(key)) continue;

      const LabelImage trial = erode_segment(labels, seg, cv);
      bool accept = size < static_cast<std::size_t>(small);
      if (!accept) {
        for (int p : seg.pixels) inside[static_cast<std::size_t>(p)] = true;
        double delta = 0.0;
        for (int p : seg.pixels) {
          delta += cv(p, trial[p]) - cv(p, labels[p]);
          for_each_neighbour(p, h, w, [&](int q) {
            if (inside[static_cast<std::size_t>(q)] && q < p) return;  // counted from q
            delta += weight * ((trial[p] != trial[q]) - (labels[p] != labels[q]));
          });
        }
        for (int p : seg.pixels) inside[static_cast<std::size_t>(p)] = false;
        accept = delta < -kMinDecrease;
      }
      if (accept && trial != labels) {
        labels = trial;
        for (int p : seg.pixels) touched[static_cast<std::size_t>(p)] = true;
        changed = true;
      } else if (!accept) {
        rejected.insert(key);
      }
    }
  }
  return labels;
}

LabelImage edge_erosion(const LabelImage& f, const CostVolume& cv, int depth) {
  check_dims(f, cv);
  if (depth < 0) throw ContractViolation("edge_erosion: depth must be nonnegative");
  if (depth == 0) return f;
  const int h = f.height();
  const int w = f.width();
  LabelImage out = f;
  std::vector<bool> present(static_cast<std::size_t>(cv.classes()));
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::fill(present.begin(), present.end(), false);
      const int own = f.at(r, c);
      bool boundary = false;
      for (int rr = std::max(0, r - depth); rr <= std::min(h - 1, r + depth); ++rr) {
        for (int cc = std::max(0, c - depth); cc <= std::min(w - 1, c + depth); ++cc) {
          const int label = f.at(rr, cc);
          present[static_cast<std::size_t>(label)] = true;
          boundary = boundary || label != own;
        }
      }
      if (!boundary) continue;
      const int p = r * w + c;
      int best = own;
      for (int k = 0; k < cv.classes(); ++k) {
        if (present[static_cast<std::size_t>(k)] && cv(p, k) < cv(p, best)) best = k;
      }
      out[p] = best;
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_cost_volume(const CostVolume& cv) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + cv.data().size() * 8);
  for (char ch : {'C', 'V', 'O', 'L'}) out.push_back(static_cast<std::uint8_t>(ch));
  bytes::put_u32(out, static_cast<std::uint32_t>(cv.height()));
  bytes::put_u32(out, static_cast<std::uint32_t>(cv.width()));
  bytes::put_u32(out, static_cast<std::uint32_t>(cv.classes()));
  for (double v : cv.data()) bytes::put_f64(out, v);
  return out;
}

CostVolume decode_cost_volume(std::span<const std::uint8_t> data) {
  bytes::Reader in(data, "cost volume");
  const auto magic = in.take(4);
  if (!std::equal(magic.begin(), magic.end(), "CVOL")) throw FormatError("cost volume: bad magic");
  const std::uint32_t h = in.u32();
  const std::uint32_t w = in.u32();
  const std::uint32_t c = in.u32();
  if (h == 0 || w == 0 || c == 0) throw FormatError("cost volume: zero dimension");
  const std::uint64_t count = std::uint64_t{h} * w * c;
  if (in.remaining() != count * 8) throw FormatError("cost volume: payload size mismatch");
  std::vector<double> costs(static_cast<std::size_t>(count));
  for (double& v : costs) v = in.f64();
  return CostVolume(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), std::move(costs));
}

void write_cost_volume(const std::filesystem::path& path, const CostVolume& cv) {
  bytes::write_file(path.string(), encode_cost_volume(cv));
}

CostVolume read_cost_volume(const std::filesystem::path& path) {
  return decode_cost_volume(bytes::read_file(path.string()));
}

}  // namespace ads
