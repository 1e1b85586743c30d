#pragma once

// Partition-similarity scores between a true and an estimated segmentation.
// Inputs are label vectors; any distinct integers name distinct segments.
// Indicator vectors go through labels_from_indicator first. Logs are natural.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace episeg {

struct PairCounts {
  std::uint64_t a = 0;  // same segment in both
  std::uint64_t b = 0;  // same in truth, different in estimate
  std::uint64_t c = 0;  // different in truth, same in estimate
  std::uint64_t d = 0;  // different in both

  std::uint64_t total() const { return a + b + c + d; }
};

struct ContingencyTable {
  std::vector<std::size_t> row_sums;  // n_m
  std::vector<std::size_t> col_sums;  // n^_m'
  std::vector<std::size_t> joint;     // n_mm', row-major
  std::size_t total = 0;

  std::size_t at(std::size_t m, std::size_t mp) const { return joint[m * col_sums.size() + mp]; }
};

/// Labels from a 0/1 vector; the first entry opens segment 1 whatever its value.
std::vector<int> labels_from_indicator(std::span<const int> indicator);
ContingencyTable contingency_table(std::span<const int> truth, std::span<const int> estimate);
PairCounts pair_counts(std::span<const int> truth, std::span<const int> estimate);

double ari(std::span<const int> truth, std::span<const int> estimate);
double mutual_information(std::span<const int> truth, std::span<const int> estimate);
double nvi(std::span<const int> truth, std::span<const int> estimate);
double f_measure(std::span<const int> truth, std::span<const int> estimate);

}  // namespace episeg
