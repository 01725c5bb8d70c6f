#include "hdprof/hd_vector.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "hdprof/errors.hpp"

namespace hdprof {

namespace {

using word_type = HDVector::word_type;
constexpr std::size_t kW = HDVector::kWordBits;

std::size_t words_for(std::size_t dimension) { return (dimension + kW - 1) / kW; }

word_type tail_mask(std::size_t dimension) {
  const std::size_t used = dimension % kW;
  return used == 0 ? ~word_type{0} : (word_type{1} << used) - 1;
}

void require_same_dimension(const HDVector& a, const HDVector& b, const char* op) {
  if (a.dimension() != b.dimension()) {
    throw DimensionError(std::string(op) + ": dimension mismatch (" +
                         std::to_string(a.dimension()) + " vs " +
                         std::to_string(b.dimension()) + ")");
  }
}

// out = in << shift over a D-bit field; bits pushed past the last word are lost,
// the caller masks the tail.
void shift_up(std::span<const word_type> in, std::span<word_type> out, std::size_t shift) {
  const std::size_t n = in.size();
  const std::size_t q = shift / kW;
  const std::size_t r = shift % kW;
  for (std::size_t i = 0; i < n; ++i) {
    word_type v = 0;
    if (i >= q) {
      v = in[i - q] << r;
      if (r != 0 && i >= q + 1) v |= in[i - q - 1] >> (kW - r);
    }
    out[i] |= v;
  }
}

// out |= in >> shift. Exact because tail bits of `in` are zero.
void shift_down(std::span<const word_type> in, std::span<word_type> out, std::size_t shift) {
  const std::size_t n = in.size();
  const std::size_t q = shift / kW;
  const std::size_t r = shift % kW;
  for (std::size_t i = 0; i + q < n; ++i) {
    word_type v = in[i + q] >> r;
    if (r != 0 && i + q + 1 < n) v |= in[i + q + 1] << (kW - r);
    out[i] |= v;
  }
}

}  // namespace

HDVector::HDVector(std::size_t dimension) : dimension_(dimension), words_(words_for(dimension), 0) {
  if (dimension == 0) throw DimensionError("hypervector dimension must be positive");
}

HDVector HDVector::from_bits(std::string_view bits) {
  HDVector v(bits.size());
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] == '1') {
      v.set(j, true);
    } else if (bits[j] != '0') {
      throw DimensionError("bit string may only contain '0' and '1'");
    }
  }
  return v;
}

HDVector HDVector::from_words(std::size_t dimension, std::vector<word_type> words) {
  if (dimension == 0) throw DimensionError("hypervector dimension must be positive");
  if (words.size() != words_for(dimension)) {
    throw DimensionError("word count " + std::to_string(words.size()) +
                         " does not match dimension " + std::to_string(dimension));
  }
  HDVector v;
  v.dimension_ = dimension;
  v.words_ = std::move(words);
  v.mask_tail();
  return v;
}

void HDVector::mask_tail() noexcept {
  if (!words_.empty()) words_.back() &= tail_mask(dimension_);
}

std::size_t HDVector::popcount() const noexcept {
  std::size_t total = 0;
  for (const word_type w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

HDVector HDVector::complement() const {
  HDVector out = *this;
  for (auto& w : out.words_) w = ~w;
  out.mask_tail();
  return out;
}

std::string HDVector::to_string() const {
  std::string s(dimension_, '0');
  for (std::size_t j = 0; j < dimension_; ++j) {
    if (get(j)) s[j] = '1';
  }
  return s;
}

HDVector& HDVector::operator^=(const HDVector& other) {
  require_same_dimension(*this, other, "xor");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

HDVector xor_bind(const HDVector& a, const HDVector& b) {
  HDVector out = a;
  out ^= b;
  return out;
}

HDVector rotate(const HDVector& a, std::size_t k) {
  const std::size_t d = a.dimension();
  if (d == 0) return a;
  k %= d;
  if (k == 0) return a;
  HDVector out(d);
  shift_up(a.words(), out.mutable_words(), k);
  out.mask_tail();
  shift_down(a.words(), out.mutable_words(), d - k);
  return out;
}

std::size_t hamming(const HDVector& a, const HDVector& b) {
  require_same_dimension(a, b, "hamming");
  const auto aw = a.words();
  const auto bw = b.words();
  std::size_t total = 0;
  for (std::size_t i = 0; i < aw.size(); ++i) {
    total += static_cast<std::size_t>(std::popcount(aw[i] ^ bw[i]));
  }
  return total;
}

BundleAccumulator::BundleAccumulator(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw DimensionError("accumulator dimension must be positive");
}

void BundleAccumulator::add(const HDVector& v) {
  if (v.dimension() != dimension_) {
    throw DimensionError("bundle: dimension mismatch (" + std::to_string(dimension_) + " vs " +
                         std::to_string(v.dimension()) + ")");
  }
  add_words(v.words());
}

void BundleAccumulator::add_words(std::span<const word_type> words) {
  const std::size_t n = word_count();
  if (words.size() != n) throw DimensionError("bundle: word count mismatch");
  if (low_.empty()) low_.assign(kLowPlanes * n, 0);
  if (pending_ == kLowCapacity) fold();

  word_type* __restrict p0 = low_.data();
  word_type* __restrict p1 = p0 + n;
  word_type* __restrict p2 = p1 + n;
  word_type* __restrict p3 = p2 + n;
  const word_type* __restrict x = words.data();
  for (std::size_t i = 0; i < n; ++i) {
    word_type carry = x[i];
    word_type t = p0[i] & carry;
    p0[i] ^= carry;
    carry = t;
    t = p1[i] & carry;
    p1[i] ^= carry;
    carry = t;
    t = p2[i] & carry;
    p2[i] ^= carry;
    p3[i] ^= t;
  }
  ++pending_;
  ++added_;
}

void BundleAccumulator::fold() const {
  if (pending_ == 0) return;
  const std::size_t n = word_count();
  // Room for the full count, so the carry out of the top plane is zero.
  const auto needed = static_cast<std::size_t>(std::bit_width(added_));
  while (planes_.size() < needed) planes_.emplace_back(n, 0);
  const std::size_t plane_count = planes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    word_type carry = 0;
    for (std::size_t b = 0; b < plane_count; ++b) {
      const word_type a = b < kLowPlanes ? low_[b * n + i] : 0;
      if (a == 0 && carry == 0) {
        if (b >= kLowPlanes) break;
        continue;
      }
      word_type& p = planes_[b][i];
      const word_type s1 = p ^ a;
      const word_type c1 = (p & a) | (carry & s1);
      p = s1 ^ carry;
      carry = c1;
    }
  }
  std::fill(low_.begin(), low_.end(), 0);
  pending_ = 0;
}

std::uint64_t BundleAccumulator::count(std::size_t bit) const {
  fold();
  std::uint64_t c = 0;
  const std::size_t i = bit / kW;
  const std::size_t s = bit % kW;
  for (std::size_t b = 0; b < planes_.size(); ++b) {
    c |= ((planes_[b][i] >> s) & 1U) << b;
  }
  return c;
}

std::vector<std::uint64_t> BundleAccumulator::counts() const {
  std::vector<std::uint64_t> out(dimension_);
  for (std::size_t j = 0; j < dimension_; ++j) out[j] = count(j);
  return out;
}

HDVector BundleAccumulator::majority() const {
  if (added_ == 0) throw EmptyBundleError("majority of an empty bundle");
  fold();
  const std::uint64_t half = added_ / 2;
  const std::size_t n = word_count();
  std::vector<word_type> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    word_type greater = 0;
    word_type equal = ~word_type{0};
    for (std::size_t b = planes_.size(); b-- > 0;) {
      const word_type p = planes_[b][i];
      if (((half >> b) & 1U) == 0) {
        greater |= equal & p;
        equal &= ~p;
      } else {
        equal &= p;
      }
    }
    out[i] = greater;
  }
  return HDVector::from_words(dimension_, std::move(out));
}

void BundleAccumulator::clear() noexcept {
  added_ = 0;
  pending_ = 0;
  std::fill(low_.begin(), low_.end(), 0);
  for (auto& plane : planes_) std::fill(plane.begin(), plane.end(), 0);
}

}  // namespace hdprof
