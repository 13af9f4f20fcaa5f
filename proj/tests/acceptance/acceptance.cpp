// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   acceptance            run all criteria
//   acceptance --only 7   run criterion 7 only

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "optquad/optquad.hpp"
#include "oracles.hpp"

using namespace optquad;

namespace {

// Pinned tolerances.
constexpr int kBits = 256;
const BigReal kDigits40 = BigReal::parse("1e-40", kBits);
const BigReal kTwoPow64 = BigReal::pow2(-64, kBits);
constexpr double kRuleSeconds1 = 1.0;
constexpr double kRuleSeconds3 = 10.0;
constexpr double kOperatorSeconds = 5.0;
constexpr double kScaleTolerance = 0.01;
const BigReal kClassicalRelative = BigReal::parse("1e-30", kBits);
const BigReal kOperatorMoment = BigReal::parse("1e-20", kBits);
const BigReal kOperatorTopMoment = BigReal::parse("1e-12", kBits);
const BigReal kConvolution = BigReal::parse("1e-20", kBits);
constexpr double kInnerSumRelative = 1e-13;

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BigReal rel_diff(const BigReal& a, const BigReal& b) {
  const BigReal scale = max(abs(a), abs(b));
  return scale.is_zero() ? scale : abs(a - b) / scale;
}

std::string sci(const BigReal& x) { return x.format(3); }

std::string label(int m, int N) { return "m=" + std::to_string(m) + " N=" + std::to_string(N); }

// -- 1, 2 --------------------------------------------------------------------

Outcome classical(int m, const std::vector<int>& Ns) {
  Outcome o;
  BigReal worst(0L, kBits);
  double slowest = 0.0;
  Rational norm_const = m == 4 ? Rational(1, 1209600) : Rational(1, 47900160);
  for (int N : Ns) {
    const auto t0 = std::chrono::steady_clock::now();
    const QuadRule r = build_rule(m, N, kBits);
    const double t = seconds_since(t0);
    slowest = std::max(slowest, t);
    if (t >= kRuleSeconds1) o.fail(label(m, N) + " took " + std::to_string(t) + " s");

    const Rational h(1, N);
    Rational h2m = 1;
    for (int i = 0; i < 2 * m; ++i) h2m *= h;
    std::vector<std::pair<std::string, std::pair<BigReal, Rational>>> checks;
    for (int b = 0; b <= N; ++b)
      checks.push_back({"C[" + std::to_string(b) + "]",
                        {r.C[static_cast<std::size_t>(b)], (b == 0 || b == N) ? h / 2 : h}});
    checks.push_back({"A", {r.A, h * h / 12}});
    checks.push_back({"B", {r.B, -(h * h * h * h) / 720}});
    checks.push_back({"norm_sq", {r.norm_sq, h2m * norm_const}});
    for (const auto& [name, pair] : checks) {
      const BigReal d = rel_diff(pair.first, BigReal(pair.second, kBits));
      if (d > worst) worst = d;
      if (!(d <= kDigits40)) o.fail(label(m, N) + " " + name + " rel err " + sci(d));
    }
  }
  if (o.pass)
    o.detail = "max rel err " + sci(worst) + " (<= 1e-40), slowest build " +
               std::to_string(slowest) + " s";
  return o;
}

Outcome criterion1() { return classical(4, {1, 2, 10, 100}); }

Outcome criterion2() {
  // N = 1 violates N >= m - 3 = 2 and must be refused.
  Outcome o = classical(5, {2, 10, 100});
  try {
    build_rule(5, 1, kBits);
    o.fail("m=5 N=1 was accepted although N < m - 3");
  } catch (const ParameterError&) {
  }
  if (o.pass) o.detail += "; N=1 refused (N >= m - 3)";
  return o;
}

// -- 3 -----------------------------------------------------------------------

/// T_j(q, N) term by term with finite differences from the Stirling oracle.
BigReal inner_sum_oracle(const BigReal& q, int N, int j) {
  static const auto s2 = oracle::stirling2_table(40);
  BigReal s(0L, kBits);
  for (int i = 0; i <= j; ++i) {
    const BigReal d(oracle::fact(i) * s2[j][i], kBits);
    const BigReal tail = pow(q, static_cast<unsigned long>(N + i));
    const BigReal num = (i % 2 == 1) ? q + tail : q - tail;
    s += num / pow(q - 1, static_cast<unsigned long>(i + 1)) * d;
  }
  return s;
}

Outcome criterion3() {
  Outcome o;
  BigReal worst_sys(0L, kBits), worst_mom(0L, kBits);
  double slowest = 0.0;
  const auto bern = oracle::bernoulli_table(20);
  for (int m = 6; m <= 10; ++m)
    for (int N : {m - 3, 16, 64}) {
      const auto t0 = std::chrono::steady_clock::now();
      const QuadRule r = build_rule(m, N, kBits);
      const double t = seconds_since(t0);
      slowest = std::max(slowest, t);
      if (t >= kRuleSeconds3) o.fail(label(m, N) + " took " + std::to_string(t) + " s");

      std::vector<int> rows{2};
      for (int j = 4; j <= m - 1; ++j) rows.push_back(j);
      rows.push_back(2 * m - 4);
      rows.push_back(2 * m - 2);
      if (static_cast<int>(rows.size()) != m - 1) o.fail(label(m, N) + " row count");
      for (int j : rows) {
        BigReal lhs(0L, kBits);
        for (int k = 0; k < m - 1; ++k)
          lhs += r.d[static_cast<std::size_t>(k)] *
                 inner_sum_oracle(r.roots.roots[static_cast<std::size_t>(k)], N, j);
        const Rational want = (j >= 4 && j <= m - 1) ? bern[j + 1] / (j + 1) : Rational(0);
        const BigReal res = abs(lhs - BigReal(want, kBits));
        if (res > worst_sys) worst_sys = res;
        if (!(res <= kTwoPow64)) o.fail(label(m, N) + " equation j=" + std::to_string(j) + " " + sci(res));
      }

      const BigReal h = BigReal(1L, kBits) / N;
      for (int a = 0; a < m; ++a) {
        BigReal s(0L, kBits);
        for (int b = 0; b <= N; ++b) s += r.C[static_cast<std::size_t>(b)] * pow(h * b, static_cast<unsigned long>(a));
        if (a >= 2) s -= a * r.A;
        if (a >= 4) s -= (a * (a - 1) * (a - 2)) * r.B;
        const BigReal res = abs(s - BigReal(1L, kBits) / (a + 1));
        if (res > worst_mom) worst_mom = res;
        if (!(res <= kTwoPow64)) o.fail(label(m, N) + " moment " + std::to_string(a) + " " + sci(res));
      }
      for (int b = 0; b <= N; ++b)
        if (!(abs(r.C[static_cast<std::size_t>(b)] - r.C[static_cast<std::size_t>(N - b)]) <= kTwoPow64))
          o.fail(label(m, N) + " not palindromic at " + std::to_string(b));
      if (!(r.norm_sq.sign() > 0)) o.fail(label(m, N) + " norm_sq not positive");
    }
  if (o.pass)
    o.detail = "max system residual " + sci(worst_sys) + ", max moment residual " + sci(worst_mom) +
               " (<= 2^-64), slowest build " + std::to_string(slowest) + " s";
  return o;
}

// -- 4 -----------------------------------------------------------------------

Outcome criterion4() {
  Outcome o;
  std::ostringstream detail;
  for (int m : {4, 5, 6}) {
    const double ratio = (build_rule(m, 64, kBits).norm_sq / build_rule(m, 32, kBits).norm_sq).to_double();
    const double rel = ratio / std::ldexp(1.0, -2 * m) - 1.0;
    detail << "m=" << m << " ratio*2^" << 2 * m << "-1=" << rel << " ";
    if (!(std::fabs(rel) <= kScaleTolerance)) o.fail("m=" + std::to_string(m) + " ratio off by " + std::to_string(rel));
  }
  if (o.pass) o.detail = detail.str() + "(within 1%)";
  return o;
}

// -- 5 -----------------------------------------------------------------------

Outcome criterion5() {
  Outcome o;
  BigReal tightest(0L, kBits);
  int count = 0;
  for (int m : {4, 5, 6})
    for (int N : {8, 16, 32, 64}) {
      const QuadRule r = build_rule(m, N, kBits);
      for (const auto& id : corpus_ids()) {
        const Integrand g = corpus_integrand(id, m, kBits);
        const BigReal err = abs(apply(r, g) - *g.exact_integral);
        const BigReal bound = error_bound(r, *g.fm_l2);
        ++count;
        if (!(err <= bound)) o.fail(id + " " + label(m, N) + " error " + sci(err) + " > bound " + sci(bound));
        const BigReal ratio = err / bound;
        if (ratio > tightest) tightest = ratio;
      }
    }
  if (o.pass)
    o.detail = std::to_string(count) + " cases, max error/bound " + sci(tightest);
  return o;
}

// -- 6 -----------------------------------------------------------------------

Outcome criterion6() {
  Outcome o;
  BigReal worst(0L, kBits);
  for (int m : {4, 5})
    for (int N : {2, 8, 16, 32, 64}) {
      const QuadRule r = build_rule(m, N, kBits);
      for (const auto& id : corpus_ids()) {
        const Integrand g = corpus_integrand(id, m, kBits);
        const BigReal d = rel_diff(apply(r, g), euler_maclaurin(g, N, kBits));
        if (d > worst) worst = d;
        if (!(d <= kClassicalRelative)) o.fail(id + " " + label(m, N) + " rel diff " + sci(d));
      }
    }
  if (o.pass) o.detail = "max rel diff " + sci(worst) + " (<= 1e-30)";
  return o;
}

// -- 7 -----------------------------------------------------------------------

Outcome criterion7() {
  Outcome o;
  const int m = 4, beta_max = 80;
  const auto t0 = std::chrono::steady_clock::now();
  PrecisionScope scope(kBits);
  const DiscreteOperator op =
      build_operator(m, BigReal(1L, kBits) / 8, beta_max, unit_disk_roots(m, kBits));
  std::ostringstream detail;
  BigReal worst(0L, kBits);
  for (int k = 0; k < 2 * m; ++k) {
    const MomentCheck mc = moment(op, k);
    if (mc.residual > worst) worst = mc.residual;
    if (!(mc.residual < kOperatorMoment))
      o.fail("moment k=" + std::to_string(k) + " residual " + sci(mc.residual) + " >= 1e-20");
  }
  const MomentCheck top = moment(op, 2 * m);
  if (!(top.residual < kOperatorTopMoment))
    o.fail("|moment(k=8) - 8!| = " + sci(top.residual) + " >= 1e-12");
  const ConvolutionReport conv = convolution_residuals(op);
  if (!(conv.total() < kConvolution))
    o.fail("convolution residual " + sci(conv.max_residual) + " + tail " + sci(conv.tail_bound) + " >= 1e-20");
  const double t = seconds_since(t0);
  if (t >= kOperatorSeconds) o.fail("took " + std::to_string(t) + " s");
  detail << "max moment residual k<8 " << sci(worst) << ", |moment8 - 8!| " << sci(top.residual)
         << ", convolution " << sci(conv.max_residual) << " + tail " << sci(conv.tail_bound);
  o.detail = (o.pass ? "" : o.detail + "; ") + detail.str();
  return o;
}

// -- 8 -----------------------------------------------------------------------

Outcome criterion8() {
  Outcome o;
  std::mt19937 rng(20261019);
  BigReal worst(0L, kBits);
  int count = 0;
  for (int m = 4; m <= 8; ++m)
    for (int t = 0; t < 6; ++t) {
      const int N = std::uniform_int_distribution<int>(std::max(1, m - 3), 64)(rng);
      const QuadRule r = build_rule(m, N, kBits);
      for (int a = 0; a < m; ++a) {
        const Integrand g = monomial(static_cast<unsigned>(a), kBits);
        const BigReal res = abs(apply(r, g) - BigReal(1L, kBits) / (a + 1));
        ++count;
        if (res > worst) worst = res;
        if (!(res <= kTwoPow64))
          o.fail(label(m, N) + " x^" + std::to_string(a) + " residual " + sci(res));
      }
    }
  if (o.pass) o.detail = std::to_string(count) + " cases, max residual " + sci(worst) + " (<= 2^-64)";
  return o;
}

// -- 9 -----------------------------------------------------------------------

Outcome criterion9() {
  Outcome o;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> qd(-0.99, -0.01);
  std::uniform_int_distribution<int> nd(1, 50), jd(0, 12);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double q = qd(rng);
    const int N = nd(rng), j = jd(rng);
    const auto [brute, mag] = oracle::inner_sum_brute(q, N, j);
    const double lib_d = inner_sum(q, N, j);
    const double lib_b = inner_sum(BigReal(q, kBits), N, j).to_double();
    const double scale = mag > 0 ? mag : 1.0;
    const double rel = std::max(std::fabs(lib_d - brute), std::fabs(lib_b - brute)) / scale;
    worst = std::max(worst, rel);
    if (!(rel <= kInnerSumRelative))
      o.fail("q=" + std::to_string(q) + " N=" + std::to_string(N) + " j=" + std::to_string(j) +
             " rel diff " + std::to_string(rel));
  }
  if (o.pass) {
    std::ostringstream s;
    s << "1000 triples, max |lib - brute| / sum|terms| = " << worst << " (<= 1e-13)";
    o.detail = s.str();
  }
  return o;
}

// -- 10 ----------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(OPTQUAD_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion10() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("optquad_acc_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::vector<std::string> blocks;
  for (const char* name : {"first.json", "second.json"}) {
    const std::string path = (dir / name).string();
    if (run_cli("generate --m 8 --n 24 --bits 256 --out " + path) != 0) {
      o.fail("generate exited non-zero");
      break;
    }
    blocks.push_back(coefficient_block(read_rule_file(path)).dump());
  }
  fs::remove_all(dir);
  if (o.pass && blocks[0] != blocks[1]) o.fail("coefficient blocks differ");
  if (o.pass) o.detail = "two runs of generate --m 8 --n 24: identical coefficient blocks (" +
                         std::to_string(blocks[0].size()) + " bytes)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--only N]\n";
      return 2;
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"m=4 classical coefficients and norm", criterion1},
      {"m=5 classical coefficients and norm", criterion2},
      {"new rules m=6..10: system, moments, symmetry, positivity", criterion3},
      {"norm scaling 2^-2m", criterion4},
      {"error-bound soundness", criterion5},
      {"classical Euler-Maclaurin equivalence", criterion6},
      {"discrete operator identities at beta_max=80", criterion7},
      {"polynomial exactness", criterion8},
      {"inner_sum vs brute force", criterion9},
      {"generate determinism", criterion10}};
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << i + 1 << " [" << (o.pass ? "PASS" : "FAIL") << "] "
              << criteria[i].first << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
