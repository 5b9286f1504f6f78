#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "json.hpp"

namespace calwav::sl2z {

struct Element {
  long a = 1, b = 0, c = 0, d = 1;
  bool operator<(const Element& o) const;
  bool operator==(const Element& o) const = default;
};

Element operator*(const Element& x, const Element& y);
Element S();  // [[0,-1],[1,0]]
Element T();  // [[1,1],[0,1]]
Element power(const Element& x, long n);

/// Letter of a word in S, T: gen is 'S' or 'T', power may be negative.
struct Letter {
  char gen;
  long power;
};

/// Nearest-integer Euclid normal form gamma = T^{n_1} S T^{n_2} S ... T^m
/// (with -I written S^2). Its length sum |n_i| + #S is the word length used
/// to order the enumeration.
std::vector<Letter> normal_form(const Element& g);
long word_length(const Element& g);
Element evaluate(std::span<const Letter> word);

/// Exact word metric for {S^{+-1}, T^{+-1}} on the ball of radius n (BFS).
std::map<Element, int> bfs_ball(int n);

struct Options {
  long entry_cap = 200;  // |a|,|b|,|c|,|d| <= entry_cap
  double radius = 5.0;   // terms with |gamma^T xi| > radius are dropped
  int max_length = 50;
};

/// S_N = sum over gamma with word length <= N of exp(-|gamma^T xi|^2),
/// for N = 0..max_length.
std::vector<double> partial_sums(std::span<const double> xi, const Options& opt = {});

struct DemoResult {
  std::vector<std::vector<double>> samples;  // xi
  std::vector<std::vector<double>> sums;     // per sample, S_0..S_max
  double monotone_fraction = 0.0;
  double growth_fraction = 0.0;  // S_50 >= 10 S_5
  int n_low = 5, n_high = 50;
  nlohmann::json to_json() const;
};

/// Samples uniform on the annulus r1 <= |xi| <= r2.
DemoResult run_demo(int samples, double r1, double r2, std::uint64_t seed, const Options& opt = {});

}  // namespace calwav::sl2z
