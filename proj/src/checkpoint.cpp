#include "vgvae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vgvae/errors.hpp"

namespace vgvae {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

std::vector<NamedTensor> snapshot(const std::vector<Parameter>& params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back({p.name, p.shape, p.value});
  return out;
}

Model restore_model(const Checkpoint& c) {
  ModelConfig mc = c.config.model;
  mc.vocab_size = c.vocab.size();
  Model model(mc, 0);
  if (model.parameters().size() != c.params.size())
    throw CheckpointError("checkpoint holds " + std::to_string(c.params.size()) + " tensors, model expects " +
                              std::to_string(model.parameters().size()),
                          0);
  for (auto& p : model.parameters()) {
    const NamedTensor* t = nullptr;
    for (const auto& n : c.params)
      if (n.name == p.name) t = &n;
    if (!t) throw CheckpointError("missing tensor " + p.name, 0);
    if (t->shape != p.shape)
      throw CheckpointError("tensor " + p.name + " has shape " + shape_str(t->shape) + ", expected " +
                                shape_str(p.shape),
                            0);
    p.value = t->data;
  }
  return model;
}

namespace {

class Writer {
 public:
  template <class T>
  void pod(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
  }
  void u64(std::uint64_t v) { pod(v); }
  void str(const std::string& s) {
    u64(s.size());
    out += s;
  }
  void doubles(const std::vector<double>& v) {
    const std::size_t at = out.size();
    out.resize(at + v.size() * sizeof(double));
    if (!v.empty()) std::memcpy(out.data() + at, v.data(), v.size() * sizeof(double));
  }
  void tensor(const NamedTensor& t) {
    str(t.name);
    pod<std::uint32_t>(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) u64(d);
    doubles(t.data);
  }
  void tensors(const std::vector<NamedTensor>& ts) {
    u64(ts.size());
    for (const auto& t : ts) tensor(t);
  }

  std::string out;
};

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == s_.size(); }

  void need(std::size_t n, const char* what) {
    if (s_.size() - pos_ < n) throw CheckpointError(std::string("truncated checkpoint while reading ") + what, pos_);
  }
  template <class T>
  T pod(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::uint64_t u64(const char* what) { return pod<std::uint64_t>(what); }
  /// A count of items each occupying at least `min_bytes`; bounded by the
  /// remaining input so corrupt counts cannot trigger huge allocations.
  std::size_t count(const char* what, std::size_t min_bytes) {
    const std::size_t at = pos_;
    const auto n = u64(what);
    if (min_bytes && n > (s_.size() - pos_) / min_bytes)
      throw CheckpointError(std::string("implausible ") + what + " count", at);
    return static_cast<std::size_t>(n);
  }
  std::string str(const char* what) {
    const auto n = count(what, 1);
    need(n, what);
    std::string v = s_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::vector<double> doubles(std::size_t n, const char* what) {
    if (n > (s_.size() - pos_) / sizeof(double)) need(n * sizeof(double), what);
    std::vector<double> v(n);
    if (n) std::memcpy(v.data(), s_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  NamedTensor tensor() {
    NamedTensor t;
    t.name = str("tensor name");
    const std::size_t at = pos_;
    const auto rank = pod<std::uint32_t>("tensor rank");
    if (rank > 8) throw CheckpointError("tensor rank " + std::to_string(rank) + " too large", at);
    std::size_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::size_t dat = pos_;
      const auto d = u64("tensor dimension");
      if (d == 0 || d > s_.size()) throw CheckpointError("bad tensor dimension", dat);
      t.shape.push_back(static_cast<std::size_t>(d));
      n *= static_cast<std::size_t>(d);
      if (n > s_.size()) throw CheckpointError("tensor larger than the file", dat);
    }
    t.data = doubles(n, "tensor payload");
    return t;
  }
  std::vector<NamedTensor> tensors() {
    const auto n = count("tensor", 13);
    std::vector<NamedTensor> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(tensor());
    return v;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

constexpr char kMagic[4] = {'V', 'G', 'V', '1'};

}  // namespace

std::string encode_checkpoint(const Checkpoint& c) {
  Writer w;
  w.out.append(kMagic, 4);
  w.pod<std::uint32_t>(Checkpoint::kVersion);
  w.str(to_text(c.config));
  w.u64(c.vocab.size());
  for (const auto& t : c.vocab.tokens()) w.str(t);
  w.tensors(c.params);

  const TrainState& s = c.state;
  w.pod<std::int64_t>(s.epoch);
  w.u64(s.batch_in_epoch);
  w.u64(s.step);
  w.u64(s.order.size());
  for (auto i : s.order) w.u64(i);
  w.str(s.rng);
  w.u64(s.adam_t);
  w.tensors(s.adam_m);
  w.tensors(s.adam_v);
  w.u64(s.megabatch.size());
  for (const auto& batch : s.megabatch) {
    w.u64(batch.size());
    for (const auto& e : batch) {
      w.u64(e.key);
      w.u64(e.partner);
      w.u64(e.sentence.size());
      for (int id : e.sentence) w.pod<std::int32_t>(id);
      w.u64(e.direction.size());
      w.doubles(e.direction);
    }
  }
  w.pod<double>(s.best_dev);
  w.pod<std::int64_t>(s.best_epoch);
  return std::move(w.out);
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw CheckpointError("bad magic (not a checkpoint file)", 0);
  r.pod<std::uint32_t>("magic");
  const std::size_t vat = r.pos();
  const auto version = r.pod<std::uint32_t>("version");
  if (version != Checkpoint::kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version), vat);

  Checkpoint c;
  const std::size_t cat = r.pos();
  try {
    c.config = from_text(r.str("config"));
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("invalid config: ") + e.what(), cat);
  }
  const std::size_t vocab_at = r.pos();
  const auto nv = r.count("vocabulary", 8);
  std::vector<std::string> tokens;
  tokens.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) tokens.push_back(r.str("vocabulary entry"));
  try {
    c.vocab = Vocab(std::move(tokens));
  } catch (const FormatError& e) {
    throw CheckpointError(std::string("invalid vocabulary: ") + e.what(), vocab_at);
  }
  c.config.model.vocab_size = c.vocab.size();
  c.params = r.tensors();

  TrainState& s = c.state;
  s.epoch = static_cast<int>(r.pod<std::int64_t>("epoch"));
  s.batch_in_epoch = r.u64("batch position");
  s.step = r.u64("step");
  const auto no = r.count("order", 8);
  s.order.resize(no);
  for (auto& i : s.order) i = r.u64("order");
  s.rng = r.str("rng state");
  s.adam_t = r.u64("optimizer step");
  s.adam_m = r.tensors();
  s.adam_v = r.tensors();
  const auto nb = r.count("mega-batch", 8);
  s.megabatch.resize(nb);
  for (auto& batch : s.megabatch) {
    batch.resize(r.count("mega-batch entry", 32));
    for (auto& e : batch) {
      e.key = r.u64("entry key");
      e.partner = r.u64("entry partner");
      e.sentence.resize(r.count("entry sentence", 4));
      for (int& id : e.sentence) id = r.pod<std::int32_t>("entry token");
      e.direction = r.doubles(r.count("entry direction", 8), "entry direction");
    }
  }
  s.best_dev = r.pod<double>("best dev score");
  s.best_epoch = static_cast<int>(r.pod<std::int64_t>("best epoch"));
  if (!r.at_end()) throw CheckpointError("trailing bytes after checkpoint", r.pos());
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const std::string bytes = encode_checkpoint(c);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("error while writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace vgvae
