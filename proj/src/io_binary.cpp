#include <bit>
#include <cstring>

#include "mlcslm/error.hpp"
#include "mlcslm/io.hpp"

namespace mlcslm {

namespace {

using Where = FormatError::Where;

constexpr std::string_view kMagic = "EMB1";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("truncated stream", Where::kOffset, pos_);
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

EmbeddingArchive::EmbeddingArchive(std::uint32_t dim) : dim_(dim) {
  if (dim == 0) throw Error("embedding dimension must be positive");
}

void EmbeddingArchive::add(std::string key, std::vector<float> vec) {
  if (vec.size() != dim_)
    throw Error("vector for '" + key + "' has " + std::to_string(vec.size()) +
                " components, archive dim is " + std::to_string(dim_));
  if (index_.contains(key)) throw Error("duplicate key '" + key + "'");
  index_.emplace(key, entries_.size());
  entries_.push_back(Entry{std::move(key), std::move(vec)});
}

const std::vector<float>* EmbeddingArchive::find(const std::string& key) const {
  const auto it = index_.find(key);
  return it == index_.end() ? nullptr : &entries_[it->second].vec;
}

bool operator==(const EmbeddingArchive& a, const EmbeddingArchive& b) {
  if (a.dim_ != b.dim_ || a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.key != y.key) return false;
    // Bitwise, so NaN payloads and signed zeros compare exactly.
    if (std::memcmp(x.vec.data(), y.vec.data(), x.vec.size() * sizeof(float)) != 0)
      return false;
  }
  return true;
}

EmbeddingArchive read_embeddings(std::string_view bytes) {
  Reader r(bytes);
  if (r.remaining() < 4 || r.take(4) != kMagic)
    throw FormatError("bad magic", Where::kOffset, 0);
  const std::uint32_t dim = r.u32();
  if (dim == 0) throw FormatError("zero dimension", Where::kOffset, 4);
  const std::uint32_t count = r.u32();
  EmbeddingArchive archive(dim);
  for (std::uint32_t n = 0; n < count; ++n) {
    const std::size_t record_at = r.offset();
    const std::uint32_t key_len = r.u32();
    std::string key(r.take(key_len));
    const std::size_t payload = static_cast<std::size_t>(dim) * 4;
    const std::string_view raw = r.take(payload);
    std::vector<float> vec(dim);
    for (std::uint32_t k = 0; k < dim; ++k) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * k + b])) << (8 * b);
      vec[k] = std::bit_cast<float>(bits);
    }
    if (archive.find(key))
      throw FormatError("duplicate key '" + key + "'", Where::kOffset, record_at);
    archive.add(std::move(key), std::move(vec));
  }
  if (r.remaining() != 0)
    throw FormatError("trailing bytes after last record", Where::kOffset, r.offset());
  return archive;
}

std::string write_embeddings(const EmbeddingArchive& archive) {
  std::string out(kMagic);
  put_u32(out, archive.dim());
  put_u32(out, static_cast<std::uint32_t>(archive.size()));
  for (const auto& e : archive.entries()) {
    put_u32(out, static_cast<std::uint32_t>(e.key.size()));
    out += e.key;
    for (float v : e.vec) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

}  // namespace mlcslm
