#include "mvdvc/turbo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mvdvc {

namespace {

constexpr int kStates = 16;
constexpr double kNegInf = -1e30;

// state = d1 | d2<<1 | d3<<2 | d4<<3 (d1 most recent feedback value)
inline int feedback_tap(int s) { return ((s >> 2) ^ (s >> 3)) & 1; }       // D^3 + D^4
inline int parity_out(int a, int s) { return (a ^ s ^ (s >> 2) ^ (s >> 3)) & 1; }  // 1+D+D^3+D^4
inline int next_state(int a, int s) { return (a | (s << 1)) & 15; }

struct Trellis {
  int next[kStates][2];  // by info bit u
  int par[kStates][2];
  Trellis() {
    for (int s = 0; s < kStates; s++)
      for (int u = 0; u < 2; u++) {
        int a = u ^ feedback_tap(s);
        next[s][u] = next_state(a, s);
        par[s][u] = parity_out(a, s);
      }
  }
};
const Trellis kTrellis;

inline double max_star(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a - b > 37.0) return a;  // exp underflows past this
  return a + std::log1p(std::exp(b - a));
}

inline double half_llr(int bit, double llr) { return bit ? -0.5 * llr : 0.5 * llr; }

// One constituent log-MAP pass. sys/apriori/par cover n info steps; the
// terminated encoder appends 4 tail steps with their own channel values.
void bcjr(std::span<const double> sys, std::span<const double> apriori,
          std::span<const double> par, std::span<const double> tail_sys,
          std::span<const double> tail_par, bool terminated, std::span<double> extrinsic) {
  const int n = int(sys.size());
  const int steps = terminated ? n + 4 : n;

  auto step_llrs = [&](int k, double& ls, double& lp) {
    if (k < n) {
      ls = sys[k] + apriori[k];
      lp = par[k];
    } else {
      ls = tail_sys[k - n];
      lp = tail_par[k - n];
    }
  };

  std::vector<double> alpha(size_t(steps + 1) * kStates, kNegInf);
  alpha[0] = 0.0;
  for (int k = 0; k < steps; k++) {
    double ls, lp;
    step_llrs(k, ls, lp);
    double* a0 = &alpha[size_t(k) * kStates];
    double* a1 = &alpha[size_t(k + 1) * kStates];
    for (int s2 = 0; s2 < kStates; s2++) a1[s2] = kNegInf;
    for (int s = 0; s < kStates; s++) {
      if (a0[s] <= kNegInf) continue;
      for (int u = 0; u < 2; u++) {
        double g = half_llr(u, ls) + half_llr(kTrellis.par[s][u], lp);
        int s2 = kTrellis.next[s][u];
        a1[s2] = max_star(a1[s2], a0[s] + g);
      }
    }
    double m = *std::max_element(a1, a1 + kStates);
    for (int s2 = 0; s2 < kStates; s2++) a1[s2] -= m;
  }

  std::vector<double> beta(size_t(steps + 1) * kStates, kNegInf);
  double* bend = &beta[size_t(steps) * kStates];
  if (terminated)
    bend[0] = 0.0;
  else
    for (int s = 0; s < kStates; s++) bend[s] = 0.0;
  for (int k = steps - 1; k >= 0; k--) {
    double ls, lp;
    step_llrs(k, ls, lp);
    double* b0 = &beta[size_t(k) * kStates];
    double* b1 = &beta[size_t(k + 1) * kStates];
    for (int s = 0; s < kStates; s++) {
      double acc = kNegInf;
      for (int u = 0; u < 2; u++) {
        int s2 = kTrellis.next[s][u];
        if (b1[s2] <= kNegInf) continue;
        double g = half_llr(u, ls) + half_llr(kTrellis.par[s][u], lp);
        acc = max_star(acc, g + b1[s2]);
      }
      b0[s] = acc;
    }
    double m = *std::max_element(b0, b0 + kStates);
    if (m > kNegInf)
      for (int s = 0; s < kStates; s++) b0[s] -= m;
  }

  for (int k = 0; k < n; k++) {
    double ls, lp;
    step_llrs(k, ls, lp);
    const double* a0 = &alpha[size_t(k) * kStates];
    const double* b1 = &beta[size_t(k + 1) * kStates];
    double num = kNegInf, den = kNegInf;
    for (int s = 0; s < kStates; s++) {
      if (a0[s] <= kNegInf) continue;
      for (int u = 0; u < 2; u++) {
        int s2 = kTrellis.next[s][u];
        if (b1[s2] <= kNegInf) continue;
        double v = a0[s] + half_llr(kTrellis.par[s][u], lp) + b1[s2];
        if (u == 0)
          num = max_star(num, v);
        else
          den = max_star(den, v);
      }
    }
    // num/den exclude the systematic+apriori term, so this is extrinsic
    extrinsic[k] = num - den;
  }
}

}  // namespace

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<int> seeded_permutation(size_t n, uint64_t seed) {
  std::vector<int> p(n);
  for (size_t i = 0; i < n; i++) p[i] = int(i);
  uint64_t st = seed ^ 0x6a09e667f3bcc909ull;
  for (size_t i = n; i > 1; i--) {
    size_t j = size_t(splitmix64(st) % i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

double estimate_ber(std::span<const double> app) {
  if (app.empty()) return 0.0;
  double acc = 0.0;
  for (double l : app) acc += 1.0 / (1.0 + std::exp(std::fabs(l)));
  return acc / double(app.size());
}

TurboCodec::TurboCodec(size_t n, uint64_t interleaver_seed, uint64_t puncture_seed, int period)
    : n_(n), period_(period) {
  if (n == 0) throw std::invalid_argument("turbo: empty block");
  if (period < 1) throw std::invalid_argument("turbo: puncture period must be >= 1");
  perm_ = seeded_permutation(n, interleaver_seed);
  std::vector<int> cols0 = seeded_permutation(size_t(period), puncture_seed);
  std::vector<int> cols1 = seeded_permutation(size_t(period), puncture_seed ^ 0x51ed2701a9b1d2e3ull);
  column_order_ = {std::move(cols0), std::move(cols1)};
}

TurboCode TurboCodec::encode(std::span<const uint8_t> bits) const {
  if (bits.size() != n_) throw std::invalid_argument("turbo encode: block length mismatch");
  TurboCode code;
  code.parity1.resize(n_);
  code.parity2.resize(n_);

  int s = 0;
  for (size_t k = 0; k < n_; k++) {
    int u = bits[k] & 1;
    code.parity1[k] = uint8_t(kTrellis.par[s][u]);
    s = kTrellis.next[s][u];
  }
  for (int k = 0; k < 4; k++) {  // drive encoder 1 to state 0
    int u = feedback_tap(s);
    code.tail_sys[k] = uint8_t(u);
    code.tail_par[k] = uint8_t(kTrellis.par[s][u]);
    s = kTrellis.next[s][u];
  }

  s = 0;
  for (size_t k = 0; k < n_; k++) {
    int u = bits[perm_[k]] & 1;
    code.parity2[k] = uint8_t(kTrellis.par[s][u]);
    s = kTrellis.next[s][u];
  }
  return code;
}

ParityBatch TurboCodec::batch(int k) const {
  if (k < 0 || k >= batch_count()) throw std::out_of_range("turbo: batch index out of range");
  ParityBatch b;
  b.stream = k & 1;
  int col = column_order_[size_t(b.stream)][size_t(k >> 1)];
  for (size_t i = size_t(col); i < n_; i += size_t(period_)) b.positions.push_back(int(i));
  return b;
}

TurboDecodeResult TurboCodec::decode(const SoftInput& in, int max_iters,
                                     double early_exit_ber) const {
  if (in.sys.size() != n_ || in.parity1.size() != n_ || in.parity2.size() != n_)
    throw std::invalid_argument("turbo decode: soft input length mismatch");

  std::vector<double> sys_int(n_), le1(n_, 0.0), le2(n_, 0.0), la1(n_, 0.0), la2(n_, 0.0);
  for (size_t k = 0; k < n_; k++) sys_int[k] = in.sys[perm_[k]];

  TurboDecodeResult res;
  res.app.resize(n_);
  std::array<double, 4> no_tail{};

  for (int it = 1; it <= max_iters; it++) {
    bcjr(in.sys, la1, in.parity1, in.tail_sys, in.tail_par, true, le1);
    for (size_t k = 0; k < n_; k++) la2[k] = le1[perm_[k]];
    bcjr(sys_int, la2, in.parity2, no_tail, no_tail, false, le2);
    for (size_t k = 0; k < n_; k++) la1[perm_[k]] = le2[k];

    for (size_t k = 0; k < n_; k++) res.app[k] = in.sys[k] + le1[k] + la1[k];
    res.iterations = it;
    res.est_ber = estimate_ber(res.app);
    if (res.est_ber <= early_exit_ber) break;
  }

  res.bits.resize(n_);
  for (size_t k = 0; k < n_; k++) res.bits[k] = res.app[k] < 0.0 ? 1 : 0;
  return res;
}

}  // namespace mvdvc
