#include "seqembed/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "seqembed/error.hpp"

namespace seqembed {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= kFnvPrime;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  const std::vector<std::uint8_t>& buffer() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t n, const std::string& path)
      : data_(data), size_(n), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

  void need(std::size_t n) const {
    if (pos_ + n > size_) {
      throw DataError("checkpoint '" + path_ + "' is truncated");
    }
  }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string path_;
};

void write_config(Writer& w, const ModelConfig& c) {
  w.u64(c.max_len);
  w.u64(c.conv1.kernel);
  w.u64(c.conv1.stride);
  w.u64(c.conv1.filters);
  w.u64(c.conv2.kernel);
  w.u64(c.conv2.stride);
  w.u64(c.conv2.filters);
  w.u64(c.pool.kernel);
  w.u64(c.pool.stride);
  w.u64(c.bilstm_dim_per_dir);
  w.u64(c.embedding_dim);
  w.u64(c.num_classes);
  w.u64(c.seed);
}

ModelConfig read_config(Reader& r) {
  ModelConfig c;
  c.max_len = r.u64();
  c.conv1.kernel = r.u64();
  c.conv1.stride = r.u64();
  c.conv1.filters = r.u64();
  c.conv2.kernel = r.u64();
  c.conv2.stride = r.u64();
  c.conv2.filters = r.u64();
  c.pool.kernel = r.u64();
  c.pool.stride = r.u64();
  c.bilstm_dim_per_dir = r.u64();
  c.embedding_dim = r.u64();
  c.num_classes = r.u64();
  c.seed = r.u64();
  return c;
}

}  // namespace

void save_checkpoint(const EmbedNet& net, const std::string& path) {
  Writer payload;
  payload.u32(kCheckpointVersion);
  write_config(payload, net.config);

  const std::vector<const Parameter*> params = net.parameters();
  payload.u32(static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    payload.u32(static_cast<std::uint32_t>(p->name.size()));
    payload.bytes(p->name.data(), p->name.size());
    payload.u32(static_cast<std::uint32_t>(p->value.shape.size()));
    for (std::size_t d : p->value.shape) payload.u64(d);
    for (double v : p->value.data) payload.f32(static_cast<float>(v));
  }

  const auto& body = payload.buffer();
  const std::uint64_t checksum = fnv1a(body.data(), body.size());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out.write(kCheckpointMagic, 4);
  out.write(reinterpret_cast<const char*>(body.data()),
            static_cast<std::streamsize>(body.size()));
  Writer tail;
  tail.u64(checksum);
  out.write(reinterpret_cast<const char*>(tail.buffer().data()), 8);
  if (!out) throw DataError("I/O error writing checkpoint '" + path + "'");
}

EmbedNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  std::vector<std::uint8_t> file((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());

  if (file.size() < 4 + 8 || std::memcmp(file.data(), kCheckpointMagic, 4) != 0) {
    throw DataError("checkpoint '" + path + "' has a bad magic header");
  }
  const std::size_t body_size = file.size() - 4 - 8;
  const std::uint8_t* body = file.data() + 4;

  Reader tail(file.data() + 4 + body_size, 8, path);
  const std::uint64_t stored = tail.u64();
  const std::uint64_t computed = fnv1a(body, body_size);
  if (stored != computed) {
    throw DataError("checkpoint '" + path + "' failed its checksum");
  }

  Reader r(body, body_size, path);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint '" + path + "' has unsupported version " +
                    std::to_string(version));
  }

  ModelConfig config = read_config(r);
  EmbedNet net = build(config);

  const std::uint32_t count = r.u32();
  std::vector<Parameter*> params = net.parameters();
  if (count != params.size()) {
    throw DataError("checkpoint '" + path + "' holds " + std::to_string(count) +
                    " tensors, expected " + std::to_string(params.size()));
  }
  for (Parameter* p : params) {
    const std::uint32_t name_len = r.u32();
    const std::string name = r.str(name_len);
    if (name != p->name) {
      throw DataError("checkpoint '" + path + "' tensor '" + name +
                      "' does not match expected '" + p->name + "'");
    }
    const std::uint32_t ndim = r.u32();
    std::vector<std::size_t> shape(ndim);
    for (std::uint32_t i = 0; i < ndim; ++i) shape[i] = r.u64();
    if (shape != p->value.shape) {
      throw DataError("checkpoint '" + path + "' tensor '" + name + "' has shape " +
                      shape_str(shape) + ", expected " + shape_str(p->value.shape));
    }
    for (double& v : p->value.data) v = static_cast<double>(r.f32());
    // Moments restart from zero; a checkpoint freezes values, not optimizer
    // state.
    p->adam_m.fill(0.0);
    p->adam_v.fill(0.0);
    p->grad.fill(0.0);
  }
  if (r.pos() != body_size) {
    throw DataError("checkpoint '" + path + "' has trailing bytes");
  }
  return net;
}

}  // namespace seqembed
