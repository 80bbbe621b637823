#pragma once

#include <cmath>
#include <vector>

// Brute-force clustering scores used to check the library's contingency-table
// implementation. NMI goes through joint entropies instead of the mutual
// information sum; ARI counts element pairs directly.
namespace dkgccl::testing::oracle {

// The two NMI routes round differently, so agreement is to a few ulps of 1.
inline constexpr double kNmiTolerance = 1e-12;

// Every set partition of {0..n-1} as a restricted growth string.
inline std::vector<std::vector<int>> set_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(n, 0);
  auto rec = [&](auto& self, int i, int max_label) -> void {
    if (i == n) {
      out.push_back(a);
      return;
    }
    for (int l = 0; l <= max_label + 1; ++l) {
      a[i] = l;
      self(self, i + 1, std::max(max_label, l));
    }
  };
  if (n > 0) {
    a[0] = 0;
    rec(rec, 1, 0);
  }
  return out;
}

inline double entropy_of(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const int n = static_cast<int>(a.size());
  int ka = 0;
  int kb = 0;
  for (int i = 0; i < n; ++i) {
    ka = std::max(ka, a[i] + 1);
    kb = std::max(kb, b[i] + 1);
  }
  std::vector<double> ca(ka, 0.0), cb(kb, 0.0), joint(ka * kb, 0.0);
  for (int i = 0; i < n; ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    joint[a[i] * kb + b[i]] += 1;
  }
  const double ha = entropy_of(ca, n);
  const double hb = entropy_of(cb, n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  const double mi = ha + hb - entropy_of(joint, n);
  const double v = mi / (0.5 * (ha + hb));
  return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

inline double ari(const std::vector<int>& a, const std::vector<int>& b) {
  const int n = static_cast<int>(a.size());
  double both = 0.0;
  double in_a = 0.0;
  double in_b = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      both += sa && sb;
      in_a += sa;
      in_b += sb;
    }
  }
  const double total = n * (n - 1) / 2.0;
  const double expected = in_a * in_b / total;
  const double maximum = 0.5 * (in_a + in_b);
  if (maximum == expected) return 1.0;
  return (both - expected) / (maximum - expected);
}

}  // namespace dkgccl::testing::oracle
