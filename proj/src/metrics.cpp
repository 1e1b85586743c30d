#include "episeg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "episeg/errors.hpp"

namespace episeg {

namespace {

void require_same_length(std::span<const int> truth, std::span<const int> estimate) {
  if (truth.size() != estimate.size()) {
    throw ValidationError("partitions differ in length: " + std::to_string(truth.size()) + " vs " +
                          std::to_string(estimate.size()));
  }
  if (truth.empty()) throw ValidationError("partitions must not be empty");
}

// Maps arbitrary labels to 0..k-1 in increasing label order.
std::vector<std::size_t> dense(std::span<const int> labels, std::size_t& count) {
  std::map<int, std::size_t> index;
  for (int v : labels) index.emplace(v, 0);
  std::size_t next = 0;
  for (auto& [v, i] : index) i = next++;
  count = next;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) out[t] = index[labels[t]];
  return out;
}

double choose2(double n) { return n * (n - 1.0) / 2.0; }

// sum over cells n_mm' ln(n_mm' T / (n_m n^_m')); T * MI
double scaled_mi(const ContingencyTable& table) {
  const double total = static_cast<double>(table.total);
  double sum = 0.0;
  for (std::size_t m = 0; m < table.row_sums.size(); ++m) {
    for (std::size_t mp = 0; mp < table.col_sums.size(); ++mp) {
      const double n = static_cast<double>(table.at(m, mp));
      if (n == 0.0) continue;
      sum += n * std::log(n * total / (static_cast<double>(table.row_sums[m]) *
                                       static_cast<double>(table.col_sums[mp])));
    }
  }
  return sum;
}

}  // namespace

std::vector<int> labels_from_indicator(std::span<const int> indicator) {
  std::vector<int> out(indicator.size());
  int label = 0;
  for (std::size_t t = 0; t < indicator.size(); ++t) {
    if (t == 0 || indicator[t] != 0) ++label;
    out[t] = label;
  }
  return out;
}

ContingencyTable contingency_table(std::span<const int> truth, std::span<const int> estimate) {
  require_same_length(truth, estimate);
  std::size_t rows = 0, cols = 0;
  const auto z = dense(truth, rows);
  const auto zh = dense(estimate, cols);
  ContingencyTable table;
  table.row_sums.assign(rows, 0);
  table.col_sums.assign(cols, 0);
  table.joint.assign(rows * cols, 0);
  table.total = truth.size();
  for (std::size_t t = 0; t < z.size(); ++t) {
    ++table.row_sums[z[t]];
    ++table.col_sums[zh[t]];
    ++table.joint[z[t] * cols + zh[t]];
  }
  return table;
}

PairCounts pair_counts(std::span<const int> truth, std::span<const int> estimate) {
  const auto table = contingency_table(truth, estimate);
  auto pairs = [](std::size_t n) { return static_cast<std::uint64_t>(n) * (n - (n > 0 ? 1 : 0)) / 2; };
  std::uint64_t same_both = 0, same_truth = 0, same_estimate = 0;
  for (std::size_t n : table.joint) same_both += pairs(n);
  for (std::size_t n : table.row_sums) same_truth += pairs(n);
  for (std::size_t n : table.col_sums) same_estimate += pairs(n);
  PairCounts out;
  out.a = same_both;
  out.b = same_truth - same_both;
  out.c = same_estimate - same_both;
  out.d = pairs(table.total) - out.a - out.b - out.c;
  return out;
}

double ari(std::span<const int> truth, std::span<const int> estimate) {
  const PairCounts pc = pair_counts(truth, estimate);
  const double a = static_cast<double>(pc.a), b = static_cast<double>(pc.b);
  const double c = static_cast<double>(pc.c), d = static_cast<double>(pc.d);
  const double n2 = choose2(static_cast<double>(truth.size()));
  const double expected = (a + b) * (a + c) + (c + d) * (b + d);
  const double denom = n2 * n2 - expected;
  if (denom == 0.0) return 1.0;  // both partitions trivial in the same way
  return (n2 * (a + d) - expected) / denom;
}

double mutual_information(std::span<const int> truth, std::span<const int> estimate) {
  const auto table = contingency_table(truth, estimate);
  return std::max(0.0, scaled_mi(table) / static_cast<double>(table.total));
}

double nvi(std::span<const int> truth, std::span<const int> estimate) {
  const auto table = contingency_table(truth, estimate);
  const double total = static_cast<double>(table.total);
  if (table.total < 2) return 0.0;
  // VI = H(z | z^) + H(z^ | z), summed cell by cell so equal partitions give exactly 0
  double vi = 0.0;
  for (std::size_t m = 0; m < table.row_sums.size(); ++m) {
    for (std::size_t mp = 0; mp < table.col_sums.size(); ++mp) {
      const double n = static_cast<double>(table.at(m, mp));
      if (n == 0.0) continue;
      vi -= n * (std::log(n / static_cast<double>(table.row_sums[m])) +
                 std::log(n / static_cast<double>(table.col_sums[mp])));
    }
  }
  return std::clamp(vi / (total * std::log(total)), 0.0, 1.0);
}

double f_measure(std::span<const int> truth, std::span<const int> estimate) {
  const auto table = contingency_table(truth, estimate);
  double sum = 0.0;
  for (std::size_t m = 0; m < table.row_sums.size(); ++m) {
    const double nm = static_cast<double>(table.row_sums[m]);
    double best = 0.0;
    for (std::size_t mp = 0; mp < table.col_sums.size(); ++mp) {
      best = std::max(best, static_cast<double>(table.at(m, mp)) / (nm + static_cast<double>(table.col_sums[mp])));
    }
    sum += nm * best;
  }
  return 2.0 * sum / static_cast<double>(table.total);
}

}  // namespace episeg
