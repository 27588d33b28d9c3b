#include <gmp.h>
#include <mpfr.h>

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "caplab/spectral.hpp"

// Layout (all integers little-endian):
//   "CAPLABCK" u32 version
//   u64 descriptor hash, u64 iteration, u32 precision digits, u32 precision bits,
//   f64 shift (as its bit pattern), u64 vector length
//   per entry: u8 kind (0 zero, 1 finite non-zero), u8 sign, i64 exponent,
//              u64 limb count, limbs (radix 2^64, least significant first);
//              value = sign * mantissa * 2^exponent
//   u64 FNV-1a checksum of everything before it

namespace caplab {

namespace {

constexpr char magic[8] = {'C', 'A', 'P', 'L', 'A', 'B', 'C', 'K'};
constexpr std::uint32_t format_version = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  template <class T>
  void put(T v) {
    std::array<unsigned char, sizeof(T)> b;
    std::uint64_t u = 0;
    std::memcpy(&u, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    bytes(b.data(), b.size());
  }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& s, std::size_t end) : s_(s), end_(end) {}
  void bytes(void* p, std::size_t n) {
    if (pos_ + n > end_) throw CheckpointError("corrupt checkpoint: truncated");
    std::memcpy(p, s_.data() + pos_, n);
    pos_ += n;
  }
  template <class T>
  T get() {
    std::array<unsigned char, sizeof(T)> b;
    bytes(b.data(), b.size());
    std::uint64_t u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    T v;
    std::memcpy(&v, &u, sizeof(T));
    return v;
  }
  std::size_t position() const { return pos_; }

 private:
  const std::string& s_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

void write_real(Writer& w, const Real& x) {
  mpfr_srcptr p = x.backend().data();
  if (!mpfr_number_p(p)) throw CheckpointError("cannot checkpoint a non-finite value");
  if (mpfr_zero_p(p)) {
    w.put<std::uint8_t>(0);
    w.put<std::uint8_t>(0);
    w.put<std::int64_t>(0);
    w.put<std::uint64_t>(0);
    return;
  }
  mpz_t z;
  mpz_init(z);
  const mpfr_exp_t e = mpfr_get_z_2exp(z, p);
  w.put<std::uint8_t>(1);
  w.put<std::uint8_t>(mpz_sgn(z) < 0 ? 1 : 0);
  w.put<std::int64_t>(static_cast<std::int64_t>(e));
  std::size_t count = 0;
  std::vector<std::uint64_t> limbs((mpz_sizeinbase(z, 2) + 63) / 64);
  mpz_export(limbs.data(), &count, -1, sizeof(std::uint64_t), 0, 0, z);
  mpz_clear(z);
  w.put<std::uint64_t>(count);
  for (std::size_t i = 0; i < count; ++i) w.put<std::uint64_t>(limbs[i]);
}

Real read_real(Reader& r, unsigned bits) {
  const auto kind = r.get<std::uint8_t>();
  const auto sign = r.get<std::uint8_t>();
  const auto e = r.get<std::int64_t>();
  const auto count = r.get<std::uint64_t>();
  Real x;
  mpfr_set_prec(x.backend().data(), static_cast<mpfr_prec_t>(bits));
  if (kind == 0) {
    if (count != 0) throw CheckpointError("corrupt checkpoint: malformed zero");
    mpfr_set_zero(x.backend().data(), 1);
    return x;
  }
  if (kind != 1 || sign > 1 || count == 0 || count > (bits + 63) / 64 + 1) throw CheckpointError("corrupt checkpoint: malformed entry");
  std::vector<std::uint64_t> limbs(count);
  for (auto& l : limbs) l = r.get<std::uint64_t>();
  mpz_t z;
  mpz_init(z);
  mpz_import(z, count, -1, sizeof(std::uint64_t), 0, 0, limbs.data());
  if (sign) mpz_neg(z, z);
  const int inexact = mpfr_set_z_2exp(x.backend().data(), z, static_cast<mpfr_exp_t>(e), MPFR_RNDN);
  mpz_clear(z);
  if (inexact != 0) throw CheckpointError("corrupt checkpoint: mantissa wider than the stored precision");
  return x;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const CheckpointState& state) {
  Writer w;
  w.bytes(magic, sizeof magic);
  w.put<std::uint32_t>(format_version);
  w.put<std::uint64_t>(state.descriptor_hash);
  w.put<std::uint64_t>(state.iteration);
  w.put<std::uint32_t>(state.precision_digits);
  const mpfr_prec_t bits = state.vector.size() ? mpfr_get_prec(state.vector[0].backend().data()) : 0;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(bits));
  w.put<double>(state.shift);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(state.vector.size()));
  for (Eigen::Index i = 0; i < state.vector.size(); ++i) write_real(w, state.vector[i]);
  const std::uint64_t sum = fnv1a64(w.data());
  w.put<std::uint64_t>(sum);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    out.flush();
    if (!out) throw CheckpointError("short write to checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  if (data.size() < sizeof magic + 8) throw CheckpointError("corrupt checkpoint: truncated");
  const std::size_t body = data.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[body + i])) << (8 * i);
  if (stored != fnv1a64(std::string_view(data.data(), body))) throw CheckpointError("corrupt checkpoint: checksum mismatch");
  Reader r(data, body);
  char m[8];
  r.bytes(m, sizeof m);
  if (std::memcmp(m, magic, sizeof magic) != 0) throw CheckpointError("not a checkpoint file");
  if (r.get<std::uint32_t>() != format_version) throw CheckpointError("unsupported checkpoint version");
  CheckpointState st;
  st.descriptor_hash = r.get<std::uint64_t>();
  st.iteration = r.get<std::uint64_t>();
  st.precision_digits = r.get<std::uint32_t>();
  const auto bits = r.get<std::uint32_t>();
  st.shift = r.get<double>();
  const auto len = r.get<std::uint64_t>();
  if (len > body) throw CheckpointError("corrupt checkpoint: implausible length");
  st.vector.resize(static_cast<Eigen::Index>(len));
  for (Eigen::Index i = 0; i < st.vector.size(); ++i) st.vector[i] = read_real(r, bits);
  if (r.position() != body) throw CheckpointError("corrupt checkpoint: trailing bytes");
  return st;
}

}  // namespace caplab
