#pragma once

// Exact counts of distinct serializations. A word is one (note, octave-duration,
// instrument) combination; a stream of MS words has |W|^MS possible orderings
// and K ordered streams have |W|^(MS*K).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "probmusic/spec.hpp"

namespace probmusic {

using BigInt = boost::multiprecision::cpp_int;

std::uint64_t word_count(const CompositionSpec& spec);

BigInt serialization_count(std::uint64_t words, std::uint64_t length_ms);
BigInt total_count(std::uint64_t words, std::uint64_t length_ms, std::uint64_t streams_k);

std::size_t decimal_digits(const BigInt& value);
// D when value == 10^D.
std::optional<std::size_t> power_of_ten_exponent(const BigInt& value);
// "10^240" for powers of ten, the full decimal when short, otherwise a
// leading-digits form such as "1.2676506e+30".
std::string describe(const BigInt& value);

struct MultiplicityReport {
  DistinctCounts counts;
  std::uint64_t words = 0;
  std::uint64_t length_ms = 0;
  std::uint64_t streams_k = 0;
  BigInt per_stream;
  BigInt total;
  std::size_t per_stream_digits = 0;
  std::size_t total_digits = 0;
};

MultiplicityReport multiplicity_report(const CompositionSpec& spec, std::uint64_t length_ms,
                                       std::uint64_t streams_k);

// Multi-line human-readable rendering used by `probmusic info`.
std::string format_report(const MultiplicityReport& report);

}  // namespace probmusic
