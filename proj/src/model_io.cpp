#include "ads/model_io.hpp"

#include <fstream>
#include <iterator>
#include <limits>

#include "ads/bytes.hpp"
#include "ads/error.hpp"

namespace ads {

namespace bytes {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) throw FormatError("read failed for " + path);
  return data;
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw FormatError("write failed for " + path);
}

}  // namespace bytes

namespace {

constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kRoot = 0;
constexpr std::uint8_t kChild = 1;
constexpr std::uint8_t kMerged = 2;

std::uint16_t narrow16(long v, const char* what) {
  if (v < 0 || v > std::numeric_limits<std::uint16_t>::max()) {
    throw ContractViolation(std::string("save_model: ") + what + " does not fit in 16 bits");
  }
  return static_cast<std::uint16_t>(v);
}

void put_record(std::vector<std::uint8_t>& out, std::uint8_t tag, int level, int atom,
                const FlatDictionary& d) {
  bytes::put_u8(out, tag);
  bytes::put_u16(out, narrow16(level, "level"));
  bytes::put_u16(out, narrow16(atom, "atom index"));
  bytes::put_u16(out, narrow16(d.size(), "atom count"));
  const Matrix& a = d.atoms();
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) bytes::put_f64(out, a(i, k));
  }
}

struct Record {
  std::uint8_t tag;
  int level;
  int atom;
  int node;
};

void collect(const MultilevelDictionary& d, int node, int atom, std::vector<Record>& out) {
  const DictionaryNode& n = d.node(node);
  out.push_back({node == 0 ? kRoot : kChild, n.level, atom, node});
  for (std::size_t k = 0; k < n.children.size(); ++k) {
    if (n.children[k] >= 0) collect(d, n.children[k], static_cast<int>(k), out);
  }
}

FlatDictionary read_dictionary(bytes::Reader& in, int dim, int k) {
  Matrix atoms(dim, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < dim; ++i) atoms(i, j) = in.f64();
  }
  try {
    return FlatDictionary(std::move(atoms));
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("model: invalid dictionary: ") + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> encode_model(const ClassifierModel& model) {
  model.validate();
  std::vector<std::uint8_t> out{'A', 'D', 'S', '1'};
  bytes::put_u16(out, kVersion);
  bytes::put_u16(out, narrow16(model.side, "patch side"));
  bytes::put_u16(out, narrow16(model.classes(), "class count"));
  bytes::put_u16(out, narrow16(model.sparsity, "sparsity"));
  for (const MultilevelDictionary& d : model.dictionaries) {
    std::vector<Record> records;
    collect(d, 0, 0, records);
    for (int level = 2; level <= d.levels(); ++level) {
      if (d.merged(level)) records.push_back({kMerged, level, 0, -1});
    }
    bytes::put_u16(out, narrow16(d.levels(), "levels"));
    bytes::put_u32(out, static_cast<std::uint32_t>(records.size()));
    for (const Record& r : records) {
      const FlatDictionary& dict = r.tag == kMerged ? *d.merged(r.level) : d.node(r.node).dictionary;
      put_record(out, r.tag, r.level, r.atom, dict);
    }
  }
  return out;
}

ClassifierModel decode_model(std::span<const std::uint8_t> data) {
  bytes::Reader in(data, "model");
  const auto magic = in.take(4);
  if (!(magic[0] == 'A' && magic[1] == 'D' && magic[2] == 'S' && magic[3] == '1')) {
    throw FormatError("model: bad magic");
  }
  if (in.u16() != kVersion) throw FormatError("model: unsupported version");
  ClassifierModel model;
  model.side = in.u16();
  const int classes = in.u16();
  model.sparsity = in.u16();
  if (model.side < 1 || classes < 1 || model.sparsity < 1) {
    throw FormatError("model: side, class count and sparsity must be positive");
  }
  const int dim = model.side * model.side;

  for (int c = 0; c < classes; ++c) {
    const int levels = in.u16();
    const std::uint32_t count = in.u32();
    if (levels < 1 || count < 1) throw FormatError("model: empty class structure");

    // Root first.
    if (in.u8() != kRoot) throw FormatError("model: first record must be the root");
    if (in.u16() != 1 || in.u16() != 0) throw FormatError("model: malformed root record");
    const int k = in.u16();
    if (k < 1) throw FormatError("model: dictionary without atoms");
    MultilevelDictionary dict(c, levels, read_dictionary(in, dim, k));

    // last[l] = node id of the most recent record at level l.
    std::vector<int> last(static_cast<std::size_t>(levels) + 1, -1);
    last[1] = 0;
    int last_merged = 1;
    try {
      for (std::uint32_t r = 1; r < count; ++r) {
        const std::uint8_t tag = in.u8();
        const int level = in.u16();
        const int atom = in.u16();
        if (in.u16() != k) throw FormatError("model: dictionaries must share the atom count");
        if (level < 2 || level > levels) throw FormatError("model: record level out of range");
        FlatDictionary d = read_dictionary(in, dim, k);
        if (tag == kChild) {
          if (last_merged > 1) throw FormatError("model: child record after merged records");
          const int parent = last[static_cast<std::size_t>(level - 1)];
          if (parent < 0) throw FormatError("model: child record without a parent");
          last[static_cast<std::size_t>(level)] = dict.add_child(parent, atom, std::move(d));
          for (int l = level + 1; l <= levels; ++l) last[static_cast<std::size_t>(l)] = -1;
        } else if (tag == kMerged) {
          if (atom != 0 || level <= last_merged) {
            throw FormatError("model: malformed merged record");
          }
          dict.set_merged(level, std::move(d));
          last_merged = level;
        } else {
          throw FormatError("model: unknown record tag");
        }
      }
    } catch (const ContractViolation& e) {
      throw FormatError(std::string("model: inconsistent structure: ") + e.what());
    }
    model.dictionaries.push_back(std::move(dict));
  }
  if (!in.at_end()) throw FormatError("model: trailing bytes");
  return model;
}

void save_model(const std::filesystem::path& path, const ClassifierModel& model) {
  bytes::write_file(path.string(), encode_model(model));
}

ClassifierModel load_model(const std::filesystem::path& path) {
  return decode_model(bytes::read_file(path.string()));
}

}  // namespace ads
