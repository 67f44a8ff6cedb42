// Acceptance run: one PASS/FAIL line per criterion, judged at fixed tolerances.
// Exit status 0 iff every criterion passes.

#include "gaudin/verify.hpp"

#include <chrono>
#include <cstdio>

using namespace gaudin;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Line {
  bool pass = true;
  std::vector<std::string> failed;
  double worst = 0;  // worst residual among checks judged at <= `identity_tol`
  int aux = 0;       // other checks: expansions, finite differences, orders
};

/// Select checks whose names contain any of `keys` and fold them into one verdict.
/// Every selected check must pass at its own tolerance.
Line collect(const Report& r, std::initializer_list<const char*> keys, double identity_tol = INFINITY) {
  Line l;
  for (const Check& c : r.checks()) {
    bool hit = false;
    for (const char* k : keys) hit = hit || c.name.find(k) != std::string::npos;
    if (!hit) continue;
    if (!c.floor && c.tol <= identity_tol) l.worst = std::max(l.worst, c.value);
    else ++l.aux;
    if (!c.pass()) {
      l.pass = false;
      l.failed.push_back(c.name);
    }
  }
  return l;
}

int failures = 0;

void print(int id, const std::string& what, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %d  %s  %-44s %s\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

void explain(const Line& l) {
  for (const auto& n : l.failed) std::printf("             failed: %s\n", n.c_str());
}

}  // namespace

int main() {
  const auto all0 = clock_type::now();
  const std::uint64_t seed = 20240917;

  // 1. special functions at three moduli.
  {
    const auto t0 = clock_type::now();
    Report r;
    for (cplx tau : {cplx(0, 1), cplx(0.3, 1.0), cplx(0.25, 0.8)}) r.merge(efun_suite(tau, 200, seed));
    const double dt = seconds_since(t0);
    Line l = collect(r, {""}, 1e-10);
    const Check* h = r.find("heat equation: order");
    print(1, "theta/phi identities, heat-equation order", l.pass && dt < 10,
          fmt("identity max %.2e, heat order %.3f, %.2f s", l.worst, h ? h->value : NAN, dt) +
              fmt(", %g auxiliary checks", l.aux));
    explain(l);
  }
  // 2. algebra and section-function identities, N = 2, 3.
  {
    const auto t0 = clock_type::now();
    Report r;
    for (int N : {2, 3}) r.merge(algebra_suite(N, cplx(0.3, 1.0), 100, seed + N));
    r.merge(sl2_suite(cplx(0.3, 1.0), 100, seed));
    const double dt = seconds_since(t0);
    Line l = collect(r, {""}, 1e-9);
    print(2, "sin-algebra, Fay-type and sl(2) identities", l.pass && dt < 10,
          fmt("identity max %.2e, %.2f s, %g auxiliary checks", l.worst, dt, l.aux));
    explain(l);
  }
  // 3, 4. mechanics.
  {
    const Report r = mech_suite(100, seed);
    Line lax = collect(r, {"Lax residual"});
    const Line le = collect(r, {"Lax residual elliptic"}), lr = collect(r, {"Lax residual rational"});
    print(3, "0+1 Lax residuals", lax.pass, fmt("elliptic max %.2e (<= 1e-9), rational max %.2e (<= 1e-12)", le.worst, lr.worst));
    explain(lax);
    Line c = collect(r, {"{H_{1,a}, H_{1,b}}", "{H_{1,a}, H_0}", "sum_a H_{1,a}"});
    print(4, "commutativity and sum of H_1", c.pass, fmt("max %.2e", c.worst));
    explain(c);
  }
  // 5 and 8 share the field report.
  const Report field = field_suite(20, seed);
  {
    Line z = collect(field, {"zero curvature", "perturbed control"});
    double ctl = INFINITY;
    for (const Check& ch : field.checks())
      if (ch.name.find("perturbed control") != std::string::npos) ctl = std::min(ctl, ch.value);
    print(5, "1+1 zero curvature and perturbed control", z.pass, fmt("max residual %.2e, min control %.2e (> 1e-2)", z.worst, ctl));
    explain(z);
  }
  // 6, 7. conserved densities.
  {
    const Report r = charges_suite(20, seed);
    Line v = collect(r, {"variational", "functional derivative"});
    print(6, "variational equations from the densities", v.pass, fmt("max %.2e", v.worst));
    explain(v);
    Line m = collect(r, {"momentum bracket", "T_{-2}", "chi_1 integral", "oint h1"});
    print(7, "momentum bracket, T_{-2}, integral identities", m.pass, fmt("max %.2e", m.worst));
    explain(m);
  }
  {
    Line red = collect(field, {"PCM", "limit at constant field"});
    print(8, "PCM, stationary and one-site reductions", red.pass, fmt("max residual %.2e", red.worst));
    explain(red);
  }
  // 9. evolution.
  {
    const auto t0 = clock_type::now();
    const Report r = evolution_suite(seed);
    Line l = collect(r, {""});
    const Check* of = r.find("RK4 order factor under dt halving >= 12");
    const Check* d0 = r.find("0+1 drift over T = 1 (dt = 1e-3)");
    double d1 = 0;
    for (const Check& c : r.checks())
      if (c.name.find("1+1 conserved drift") != std::string::npos) d1 = std::max(d1, c.value);
    const double total = seconds_since(all0);
    print(9, "conservation drift and integrator order", l.pass && total < 300,
          fmt("1+1 drift %.2e, 0+1 drift %.2e, order factor %.2f", d1, d0 ? d0->value : NAN, of ? of->value : NAN) +
              fmt(", evolution %.1f s, total %.1f s", seconds_since(t0), total));
    explain(l);
  }
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
