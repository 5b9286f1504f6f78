#include "calwav/sl2z.hpp"

#include <cmath>
#include <cstdlib>
#include <deque>
#include <numbers>
#include <random>
#include <tuple>

#include "calwav/group.hpp"

namespace calwav::sl2z {

bool Element::operator<(const Element& o) const {
  return std::tie(a, b, c, d) < std::tie(o.a, o.b, o.c, o.d);
}

Element operator*(const Element& x, const Element& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

Element S() { return {0, -1, 1, 0}; }
Element T() { return {1, 1, 0, 1}; }

Element power(const Element& x, long n) {
  Element base = x;
  if (n < 0) {
    base = {x.d, -x.b, -x.c, x.a};
    n = -n;
  }
  Element r;
  while (n > 0) {
    if (n & 1) r = r * base;
    base = base * base;
    n >>= 1;
  }
  return r;
}

namespace {

long nearest(long p, long q) {
  // round(p / q) with ties toward zero
  const long fl = static_cast<long>(std::floor(static_cast<double>(p) / static_cast<double>(q)));
  long best = fl;
  for (long cand : {fl, fl + 1})
    if (std::labs(p - cand * q) < std::labs(p - best * q) ||
        (std::labs(p - cand * q) == std::labs(p - best * q) && std::labs(cand) < std::labs(best)))
      best = cand;
  return best;
}

}  // namespace

std::vector<Letter> normal_form(const Element& g) {
  if (g.a * g.d - g.b * g.c != 1) throw Error("not an SL(2,Z) element");
  // Reduce from the left: T^{-n} then S^{-1} until the first column is
  // (+-1, 0); record the inverse letters.
  std::vector<Letter> word;
  Element r = g;
  while (r.c != 0) {
    const long n = nearest(r.a, r.c);
    if (n != 0) {
      r = power(T(), -n) * r;
      word.push_back({'T', n});
    }
    r = power(S(), -1) * r;
    word.push_back({'S', 1});
  }
  // r = +-T^m
  const long m = r.a == 1 ? r.b : -r.b;
  if (r.a == -1) word.push_back({'S', 2});
  if (m != 0) word.push_back({'T', m});
  return word;
}

long word_length(const Element& g) {
  long len = 0;
  for (const Letter& l : normal_form(g)) len += std::labs(l.power);
  return len;
}

Element evaluate(std::span<const Letter> word) {
  Element r;
  for (const Letter& l : word) r = r * power(l.gen == 'S' ? S() : T(), l.power);
  return r;
}

std::map<Element, int> bfs_ball(int n) {
  const Element gens[] = {S(), power(S(), -1), T(), power(T(), -1)};
  std::map<Element, int> dist;
  std::deque<Element> queue;
  dist[Element{}] = 0;
  queue.push_back(Element{});
  while (!queue.empty()) {
    const Element x = queue.front();
    queue.pop_front();
    const int dx = dist[x];
    if (dx == n) continue;
    for (const Element& s : gens) {
      const Element y = x * s;
      if (dist.emplace(y, dx + 1).second) queue.push_back(y);
    }
  }
  return dist;
}

namespace {

// a x + c y = gcd, returns gcd
long ext_gcd(long a, long c, long& x, long& y) {
  if (c == 0) {
    x = a >= 0 ? 1 : -1;
    y = 0;
    return std::labs(a);
  }
  long x1, y1;
  const long g = ext_gcd(c, a % c, x1, y1);
  x = y1;
  y = x1 - (a / c) * y1;
  return g;
}

}  // namespace

std::vector<double> partial_sums(std::span<const double> xi, const Options& opt) {
  const long M = opt.entry_cap;
  const double R = opt.radius;
  std::vector<double> hist(static_cast<std::size_t>(opt.max_length) + 1, 0.0);
  for (long a = -M; a <= M; ++a)
    for (long c = -M; c <= M; ++c) {
      const double u = static_cast<double>(a) * xi[0] + static_cast<double>(c) * xi[1];
      if (std::abs(u) > R) continue;
      long x, y;
      if (ext_gcd(a, c, x, y) != 1) continue;
      // a d0 - b0 c = 1 with d0 = x, b0 = -y
      const long b0 = -y, d0 = x;
      // all solutions: (b, d) = (b0 + k a, d0 + k c)
      double klo = -1e18, khi = 1e18;
      auto clip = [&](double base, double step, double bound) {
        if (step == 0.0) {
          if (std::abs(base) > bound) khi = klo - 1.0;
          return;
        }
        const double e1 = (-bound - base) / step, e2 = (bound - base) / step;
        klo = std::max(klo, std::min(e1, e2));
        khi = std::min(khi, std::max(e1, e2));
      };
      const double v0 = static_cast<double>(b0) * xi[0] + static_cast<double>(d0) * xi[1];
      clip(static_cast<double>(b0), static_cast<double>(a), static_cast<double>(M));
      clip(static_cast<double>(d0), static_cast<double>(c), static_cast<double>(M));
      clip(v0, u, R);
      for (long k = static_cast<long>(std::ceil(klo)); k <= static_cast<long>(std::floor(khi)); ++k) {
        const long b = b0 + k * a, d = d0 + k * c;
        const double v = v0 + static_cast<double>(k) * u;
        const double r2 = u * u + v * v;
        if (r2 > R * R) continue;
        const long len = word_length({a, b, c, d});
        if (len > opt.max_length) continue;
        hist[static_cast<std::size_t>(len)] += std::exp(-r2);
      }
    }
  for (std::size_t n = 1; n < hist.size(); ++n) hist[n] += hist[n - 1];
  return hist;
}

nlohmann::json DemoResult::to_json() const {
  return {{"samples", samples.size()},
          {"monotone_fraction", monotone_fraction},
          {"growth_fraction", growth_fraction},
          {"n_low", n_low},
          {"n_high", n_high}};
}

DemoResult run_demo(int samples, double r1, double r2, std::uint64_t seed, const Options& opt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  DemoResult out;
  out.n_high = std::min(out.n_high, opt.max_length);
  int mono = 0, grow = 0;
  for (int s = 0; s < samples; ++s) {
    const double r = std::sqrt(r1 * r1 + (r2 * r2 - r1 * r1) * U(rng));
    const double th = 2.0 * std::numbers::pi * U(rng);
    const std::vector<double> xi = {r * std::cos(th), r * std::sin(th)};
    auto sums = partial_sums(xi, opt);
    bool m = true;
    for (std::size_t n = 1; n < sums.size(); ++n) m = m && sums[n] >= sums[n - 1];
    mono += m;
    grow += sums[out.n_high] >= 10.0 * sums[out.n_low];
    out.samples.push_back(xi);
    out.sums.push_back(std::move(sums));
  }
  out.monotone_fraction = samples > 0 ? static_cast<double>(mono) / samples : 0.0;
  out.growth_fraction = samples > 0 ? static_cast<double>(grow) / samples : 0.0;
  return out;
}

}  // namespace calwav::sl2z
