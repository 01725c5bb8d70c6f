#include "hdprof/encoder.hpp"

#include <algorithm>

#include "hdprof/errors.hpp"

namespace hdprof {

using word_type = HDVector::word_type;

Encoder::Encoder(const HDSpaceConfig& config, const ItemMemory& im)
    : config_(config), words_((config.dimension + HDVector::kWordBits - 1) / HDVector::kWordBits) {
  config_.validate();
  if (im.alphabet() != config_.alphabet || im.dimension() != config_.dimension) {
    throw ConfigMismatchError("item memory does not match the HD space configuration");
  }
  lookup_.fill(-1);
  for (int c = 0; c < 256; ++c) lookup_[c] = im.symbol_index(static_cast<char>(c));

  if (config_.reverse_complement) {
    // alphabet is ACGT (validated): A<->T, C<->G
    complement_ = {3, 2, 1, 0};
  }

  const std::size_t n = config_.ngram_size;
  rotated_.resize(im.size() * n * words_);
  for (std::size_t s = 0; s < im.size(); ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const HDVector r = rotate(im.vector(s), i);
      std::copy(r.words().begin(), r.words().end(), rotated_.begin() + (s * n + i) * words_);
    }
  }
}

void Encoder::ngram_words(std::span<const std::uint8_t> codes, std::size_t start,
                          std::span<word_type> out) const {
  const std::size_t n = config_.ngram_size;
  std::copy_n(rotated(codes[start % n], 0), words_, out.begin());
  for (std::size_t i = 1; i < n; ++i) {
    const word_type* src = rotated(codes[(start + i) % n], i);
    for (std::size_t w = 0; w < words_; ++w) out[w] ^= src[w];
  }
}

void Encoder::ngram_words_revcomp(std::span<const std::uint8_t> codes, std::size_t start,
                                  std::span<word_type> out) const {
  const std::size_t n = config_.ngram_size;
  // Reverse complement position i holds the complement of original position N-1-i.
  std::copy_n(rotated(complement_[codes[(start + n - 1) % n]], 0), words_, out.begin());
  for (std::size_t i = 1; i < n; ++i) {
    const word_type* src = rotated(complement_[codes[(start + n - 1 - i) % n]], i);
    for (std::size_t w = 0; w < words_; ++w) out[w] ^= src[w];
  }
}

void Encoder::slide(std::span<word_type> cur, std::uint8_t oldest, std::uint8_t newest) const {
  const std::size_t nw = words_;
  const word_type* __restrict front = rotated(oldest, 0);
  const word_type* __restrict back = rotated(newest, config_.ngram_size - 1);
  word_type* __restrict c = cur.data();
  // Rotation toward lower index: result bit j = x bit (j + 1) mod D.
  const word_type x0 = c[0] ^ front[0];
  word_type x = x0;
  for (std::size_t w = 0; w + 1 < nw; ++w) {
    const word_type next = c[w + 1] ^ front[w + 1];
    c[w] = ((x >> 1) | (next << 63)) ^ back[w];
    x = next;
  }
  const std::size_t top = (config_.dimension - 1) % HDVector::kWordBits;
  c[nw - 1] = ((x >> 1) | ((x0 & 1U) << top)) ^ back[nw - 1];
}

void Encoder::slide_revcomp(std::span<word_type> cur, std::uint8_t oldest, std::uint8_t newest) const {
  const std::size_t nw = words_;
  const word_type* __restrict tail = rotated(complement_[oldest], config_.ngram_size - 1);
  const word_type* __restrict head = rotated(complement_[newest], 0);
  word_type* __restrict c = cur.data();
  const std::size_t top = (config_.dimension - 1) % HDVector::kWordBits;
  // Rotation toward higher index: result bit j = x bit (j - 1) mod D.
  const word_type last = c[nw - 1] ^ tail[nw - 1];
  word_type carry = (last >> top) & 1U;
  for (std::size_t w = 0; w < nw; ++w) {
    const word_type x = c[w] ^ tail[w];
    c[w] = ((x << 1) | carry) ^ head[w];
    carry = x >> 63;
  }
  const std::size_t used = config_.dimension - (nw - 1) * HDVector::kWordBits;
  if (used < HDVector::kWordBits) c[nw - 1] &= (word_type{1} << used) - 1;
}

HDVector Encoder::encode_ngram(std::string_view window) const {
  const std::size_t n = config_.ngram_size;
  if (window.size() != n) {
    throw WindowError("n-gram window has " + std::to_string(window.size()) + " symbols, expected " +
                      std::to_string(n));
  }
  std::vector<std::uint8_t> codes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = code(window[i]);
    if (c < 0) throw AmbiguousSymbol(std::string("symbol '") + window[i] + "' is not in the alphabet");
    codes[i] = static_cast<std::uint8_t>(c);
  }
  std::vector<word_type> words(words_);
  ngram_words(codes, 0, words);
  return HDVector::from_words(config_.dimension, std::move(words));
}

HDVector Encoder::encode_sequence(std::string_view bases) const {
  WindowBundler bundler(*this);
  bundler.feed(bases);
  return bundler.finish();
}

WindowBundler::WindowBundler(const Encoder& encoder)
    : encoder_(&encoder),
      acc_(encoder.dimension()),
      ring_(encoder.ngram_size(), 0),
      forward_(encoder.word_count(), 0),
      reverse_(encoder.word_count(), 0) {}

bool WindowBundler::capped() const noexcept {
  const auto& cap = encoder_->config().bundling_cap;
  return cap && windows_ >= *cap;
}

void WindowBundler::feed(std::string_view bases) {
  const std::size_t n = ring_.size();
  const bool revcomp = encoder_->config().reverse_complement;
  for (const char ch : bases) {
    if (capped()) return;
    const int c = encoder_->code(ch);
    if (c < 0) {
      run_ = 0;
      continue;
    }
    const std::uint8_t oldest = ring_[head_];
    ring_[head_] = static_cast<std::uint8_t>(c);
    head_ = (head_ + 1) % n;
    if (++run_ < n) continue;
    if (run_ == n) {
      // First window of a run; the oldest symbol now sits at head_.
      encoder_->ngram_words(ring_, head_, forward_);
      if (revcomp) encoder_->ngram_words_revcomp(ring_, head_, reverse_);
    } else {
      encoder_->slide(forward_, oldest, static_cast<std::uint8_t>(c));
      if (revcomp) encoder_->slide_revcomp(reverse_, oldest, static_cast<std::uint8_t>(c));
    }
    acc_.add_words(forward_);
    if (revcomp) acc_.add_words(reverse_);
    ++windows_;
  }
}

void WindowBundler::reset() noexcept {
  acc_.clear();
  head_ = 0;
  run_ = 0;
  windows_ = 0;
}

HDVector WindowBundler::finish() const {
  if (windows_ == 0) {
    throw TooShortError("sequence has no window of " + std::to_string(ring_.size()) +
                        " valid symbols");
  }
  return acc_.majority();
}

EncodedReference encode_reference(const Encoder& encoder, std::span<const std::string> segments) {
  WindowBundler bundler(encoder);
  EncodedReference out;
  for (const auto& segment : segments) {
    bundler.feed(segment);
    bundler.end_segment();
    out.genome_length += segment.size();
  }
  if (bundler.windows() == 0) throw EmptyReferenceError("reference genome yields no valid window");
  out.windows = bundler.windows();
  out.vector = bundler.finish();
  return out;
}

}  // namespace hdprof
