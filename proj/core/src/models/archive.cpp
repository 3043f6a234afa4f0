#include "edakd/models/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "edakd/errors.hpp"

namespace edakd::models {

namespace {

static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

constexpr char kMagic[4] = {'E', 'D', 'A', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& data, std::string source) : data_(data), source_(std::move(source)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(source_ + ": " + what);
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) fail("truncated weight archive");
  }
  const std::string& data_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::size_t element_size(DType d) { return d == DType::float32 ? 4 : 8; }

}  // namespace

void write_archive(const std::filesystem::path& path, const std::vector<ArchiveTensor>& tensors) {
  std::string header(kMagic, 4);
  put<std::uint32_t>(header, kVersion);
  put<std::uint32_t>(header, static_cast<std::uint32_t>(tensors.size()));
  std::string payload;
  for (const auto& t : tensors) {
    if (t.name.size() > 0xffff) throw ConfigError("tensor name too long: " + t.name);
    if (t.shape.size() > 0xff) throw ConfigError("too many dimensions in " + t.name);
    if (tensor::numel(t.shape) != t.values.size()) throw ShapeError("value count mismatch in " + t.name);
    put<std::uint16_t>(header, static_cast<std::uint16_t>(t.name.size()));
    header += t.name;
    put<std::uint8_t>(header, static_cast<std::uint8_t>(t.dtype));
    put<std::uint8_t>(header, static_cast<std::uint8_t>(t.shape.size()));
    for (std::size_t d : t.shape) put<std::uint64_t>(header, d);
    put<std::uint64_t>(header, payload.size());
    for (double v : t.values) {
      if (t.dtype == DType::float32) {
        put<float>(payload, static_cast<float>(v));
      } else {
        put<double>(payload, v);
      }
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw FormatError("write failed: " + path.string());
}

std::vector<ArchiveTensor> read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open weight archive " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(data, path.string());
  if (r.bytes(4) != std::string(kMagic, 4)) r.fail("not a weight archive (bad magic)");
  if (const auto v = r.get<std::uint32_t>(); v != kVersion) {
    r.fail("unsupported archive version " + std::to_string(v));
  }
  const auto count = r.get<std::uint32_t>();
  struct Entry {
    ArchiveTensor t;
    std::uint64_t offset;
  };
  std::vector<Entry> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    Entry e;
    const auto name_len = r.get<std::uint16_t>();
    e.t.name = r.bytes(name_len);
    const auto dtype = r.get<std::uint8_t>();
    if (dtype > 1) r.fail("unknown dtype " + std::to_string(dtype) + " for " + e.t.name);
    e.t.dtype = static_cast<DType>(dtype);
    const auto ndim = r.get<std::uint8_t>();
    for (std::uint8_t d = 0; d < ndim; ++d) {
      const auto dim = r.get<std::uint64_t>();
      if (dim == 0 || dim > (std::uint64_t{1} << 40)) r.fail("bad dimension in " + e.t.name);
      e.t.shape.push_back(static_cast<std::size_t>(dim));
    }
    e.offset = r.get<std::uint64_t>();
    entries.push_back(std::move(e));
  }
  const std::size_t payload_start = r.pos();
  const std::size_t payload_size = data.size() - payload_start;
  std::vector<ArchiveTensor> out;
  out.reserve(entries.size());
  for (auto& e : entries) {
    const std::size_t n = tensor::numel(e.t.shape);
    const std::size_t bytes = n * element_size(e.t.dtype);
    if (e.offset > payload_size || bytes > payload_size - e.offset) {
      r.fail("payload of " + e.t.name + " lies outside the file");
    }
    const char* src = data.data() + payload_start + e.offset;
    e.t.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (e.t.dtype == DType::float32) {
        float f;
        std::memcpy(&f, src + 4 * i, 4);
        e.t.values[i] = f;
      } else {
        std::memcpy(&e.t.values[i], src + 8 * i, 8);
      }
    }
    out.push_back(std::move(e.t));
  }
  return out;
}

void save_model(const std::filesystem::path& path, const ModelGraph& model) {
  std::vector<ArchiveTensor> tensors;
  for (const auto& p : model.params()) {
    const auto v = p.tensor.values();
    tensors.push_back({p.name, p.tensor.shape(), DType::float32, {v.begin(), v.end()}});
  }
  write_archive(path, tensors);
}

ModelConfig infer_config(const std::vector<ArchiveTensor>& tensors) {
  std::map<std::string, const ArchiveTensor*> by_name;
  for (const auto& t : tensors) by_name[t.name] = &t;
  auto shape_of = [&](const std::string& name) -> const tensor::Shape& {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("weight archive lacks tensor " + name);
    return it->second->shape;
  };
  ModelConfig c;
  c.kind = by_name.count("bottleneck.attn.wq") ? ModelKind::teacher : ModelKind::student;
  c.film = by_name.count("enc1.film.w_gamma") != 0;
  for (std::size_t i = 0; i < kEncoderBlocks; ++i) {
    const std::string b = "enc" + std::to_string(i + 1);
    const auto& s = shape_of(b + ".skip.weight");
    if (s.size() != 3) throw FormatError("unexpected rank for " + b + ".skip.weight");
    c.encoder_channels[i] = s[0];
  }
  const auto& k = c.kind == ModelKind::teacher ? shape_of("enc1.conv1.weight")
                                               : shape_of("enc1.conv1.dw.weight");
  if (k.size() != 3) throw FormatError("unexpected rank for enc1.conv1");
  c.kernel = k[2];
  if (c.kind == ModelKind::teacher) {
    const auto& f = shape_of("bottleneck.ffn1.weight");
    if (f.size() != 3 || c.encoder_channels.back() == 0) throw FormatError("bad bottleneck shape");
    c.ffn_expansion = f[0] / c.encoder_channels.back();
    c.ffn_kernel = f[2];
  }
  return c;
}

ModelGraph load_model(const std::filesystem::path& path) {
  const auto tensors = read_archive(path);
  ModelConfig cfg;
  try {
    cfg = infer_config(tensors);
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  ModelGraph model;
  try {
    model = ModelGraph(cfg, 0);
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": inconsistent architecture: " + e.what());
  }
  auto& params = model.params();
  if (tensors.size() != params.size()) {
    throw FormatError(path.string() + ": expected " + std::to_string(params.size()) +
                      " tensors, found " + std::to_string(tensors.size()));
  }
  for (const auto& t : tensors) {
    const auto idx = params.find(t.name);
    if (!idx) throw FormatError(path.string() + ": unexpected tensor " + t.name);
    auto& p = params[*idx];
    if (p.tensor.shape() != t.shape) {
      throw FormatError(path.string() + ": shape mismatch for " + t.name + ": " +
                        tensor::to_string(t.shape) + " vs " + tensor::to_string(p.tensor.shape()));
    }
    std::copy(t.values.begin(), t.values.end(), p.tensor.values().begin());
  }
  return model;
}

}  // namespace edakd::models
