#include "probmusic/combinatorics.hpp"

#include <sstream>

namespace probmusic {

namespace {

constexpr std::size_t kShortDigits = 30;

std::uint32_t checked_exponent(std::uint64_t e) {
  if (e > 0xFFFFFFFFULL) throw Error(Errc::InvalidParams, "exponent too large for exact evaluation");
  return static_cast<std::uint32_t>(e);
}

}  // namespace

std::uint64_t word_count(const CompositionSpec& spec) {
  DistinctCounts c = distinct_counts(spec);
  return c.notes * c.octave_durations * c.instruments;
}

BigInt serialization_count(std::uint64_t words, std::uint64_t length_ms) {
  return boost::multiprecision::pow(BigInt(words), checked_exponent(length_ms));
}

BigInt total_count(std::uint64_t words, std::uint64_t length_ms, std::uint64_t streams_k) {
  if (streams_k != 0 && length_ms > 0xFFFFFFFFULL / streams_k) {
    throw Error(Errc::InvalidParams, "exponent too large for exact evaluation");
  }
  return serialization_count(words, length_ms * streams_k);
}

std::size_t decimal_digits(const BigInt& value) {
  if (value < 0) return decimal_digits(-value);
  return value.str().size();
}

std::optional<std::size_t> power_of_ten_exponent(const BigInt& value) {
  if (value <= 0) return std::nullopt;
  std::string s = value.str();
  if (s[0] != '1' || s.find_first_not_of('0', 1) != std::string::npos) return std::nullopt;
  return s.size() - 1;
}

std::string describe(const BigInt& value) {
  if (auto e = power_of_ten_exponent(value); e && *e >= 3) return "10^" + std::to_string(*e);
  std::string s = value.str();
  if (s.size() <= kShortDigits) return s;
  std::string mantissa = s.substr(0, 1) + "." + s.substr(1, 7);
  return mantissa + "e+" + std::to_string(s.size() - 1);
}

MultiplicityReport multiplicity_report(const CompositionSpec& spec, std::uint64_t length_ms,
                                       std::uint64_t streams_k) {
  MultiplicityReport r;
  r.counts = distinct_counts(spec);
  r.words = r.counts.notes * r.counts.octave_durations * r.counts.instruments;
  r.length_ms = length_ms;
  r.streams_k = streams_k;
  r.per_stream = serialization_count(r.words, length_ms);
  r.total = boost::multiprecision::pow(r.per_stream, checked_exponent(streams_k));
  r.per_stream_digits = decimal_digits(r.per_stream);
  r.total_digits = decimal_digits(r.total);
  return r;
}

std::string format_report(const MultiplicityReport& r) {
  std::ostringstream out;
  out << "n=" << r.counts.notes << " od=" << r.counts.octave_durations << " i=" << r.counts.instruments
      << " w=" << r.words << "\n";
  out << "length=" << r.length_ms << " threads=" << r.streams_k << "\n";
  out << "per-stream " << r.words << "^" << r.length_ms << " = " << describe(r.per_stream) << " ("
      << r.per_stream_digits << " digits)\n";
  out << "total " << r.words << "^" << (r.length_ms * r.streams_k) << " = " << describe(r.total) << " ("
      << r.total_digits << " digits)\n";
  return out.str();
}

}  // namespace probmusic
