#include <cmath>

#include "doctest.h"
#include "planlearn/pdf.hpp"
#include "planlearn/rng.hpp"

using namespace planlearn;

TEST_CASE("density values") {
  CHECK(Pdf::gaussian(1.5, 1.0).density(1.5) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(Pdf::beta(5, 1).density(1.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(Pdf::beta(1, 5).density(0.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(Pdf::gamma(1, 0.1).density(0.0) == doctest::Approx(10.0).epsilon(1e-12));
  // outside support
  CHECK(Pdf::beta(2, 2).density(1.2) == 0.0);
  CHECK(Pdf::beta(2, 2).density(-0.1) == 0.0);
  CHECK(Pdf::gamma(2, 1).density(-1.0) == 0.0);
  // invalid parameters
  CHECK_THROWS_AS(Pdf::gaussian(0, 0).density(0), parameter_error);
  CHECK_THROWS_AS(Pdf::beta(0, 1).density(0.5), parameter_error);
  CHECK_THROWS_AS(Pdf::gamma(1, -1).density(0.5), parameter_error);
}

TEST_CASE("mode densities") {
  CHECK(Pdf::gaussian(7.0, 0.25).mode_density() ==
        doctest::Approx(1.5957691216057308).epsilon(1e-12));
  CHECK(Pdf::beta(5, 1).mode_density() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(Pdf::beta(1, 5).mode_density() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(Pdf::beta(2, 2).mode_density() == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(Pdf::gamma(100, 0.01).mode_density() ==
        doctest::Approx(4.006147193132941).epsilon(1e-12));
  CHECK(Pdf::gamma(1, 0.1).mode_density() == doctest::Approx(10.0).epsilon(1e-12));
  // unbounded endpoint densities stay finite through the quantile clamp
  CHECK(std::isfinite(Pdf::beta(0.5, 2).mode_density()));
  CHECK(std::isfinite(Pdf::gamma(0.5, 1).mode_density()));
}

TEST_CASE("density never exceeds the mode density") {
  Rng rng(42);
  const Pdf pdfs[] = {Pdf::gaussian(0.5, 0.25), Pdf::beta(5, 1),    Pdf::beta(1, 5),
                      Pdf::beta(3, 2),          Pdf::gamma(1, 0.1), Pdf::gamma(100, 0.01),
                      Pdf::gamma(2.5, 0.4)};
  for (const auto& p : pdfs) {
    const double cap = p.mode_density();
    for (int i = 0; i < 2000; ++i) {
      double x = 0.0;
      switch (p.kind) {
        case PdfKind::gaussian: x = rng.normal(p.a, 4 * p.b); break;
        case PdfKind::beta: x = rng.uniform(); break;
        case PdfKind::gamma: x = rng.uniform() * 5.0 * p.mean(); break;
      }
      REQUIRE(p.density(x) <= cap * (1 + 1e-12));
    }
  }
}

TEST_CASE("densities integrate to one") {
  auto integrate = [](const Pdf& p, double lo, double hi, int n) {
    double sum = 0.0;
    const double h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      sum += w * p.density(lo + i * h);
    }
    return sum * h;
  };
  CHECK(integrate(Pdf::gaussian(0.5, 0.25), -2, 3, 20000) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(integrate(Pdf::beta(5, 1), 0, 1, 20000) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(integrate(Pdf::gamma(100, 0.01), 0, 3, 20000) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gaussian fit equals the closed-form sample statistics") {
  const std::vector<double> samples = {1.0, 2.0, 3.0, 4.0};
  const Pdf fit = fit_mle(PdfKind::gaussian, samples);
  CHECK(fit.a == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(fit.b == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));

  const Pdf single = fit_mle(PdfKind::gaussian, {1.5});
  CHECK(single.a == doctest::Approx(1.5));
  CHECK(single.b == doctest::Approx(1e-3));  // floored spread
}

TEST_CASE("seeded sample fits recover the generating parameters") {
  Rng rng(20240817);
  const int n = 10000;

  SUBCASE("gaussian") {
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(rng.normal(0.5, 0.25));
    const Pdf fit = fit_mle(PdfKind::gaussian, xs);
    CHECK(std::abs(fit.a - 0.5) < 0.02);
    CHECK(std::abs(fit.b - 0.25) < 0.02);
  }
  SUBCASE("gamma") {
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(rng.gamma(100, 0.01));
    const Pdf fit = fit_mle(PdfKind::gamma, xs);
    CHECK(std::abs(fit.mean() - 1.0) < 0.02);
    std::vector<double> ys;
    for (int i = 0; i < n; ++i) ys.push_back(rng.gamma(1.0, 0.1));
    const Pdf fit2 = fit_mle(PdfKind::gamma, ys);
    CHECK(std::abs(fit2.mean() - 0.1) < 0.02);
  }
  SUBCASE("beta") {
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(rng.beta(5, 1));
    const Pdf fit = fit_mle(PdfKind::beta, xs);
    CHECK(std::abs(fit.mean() - 5.0 / 6.0) < 0.02);
  }
  SUBCASE("degenerate identical samples stay finite") {
    const Pdf g = fit_mle(PdfKind::gamma, std::vector<double>(50, 0.7));
    CHECK(std::isfinite(g.a));
    CHECK(std::isfinite(g.b));
    CHECK(g.mean() == doctest::Approx(0.7).epsilon(1e-6));
    const Pdf b = fit_mle(PdfKind::beta, std::vector<double>(50, 0.25));
    CHECK(std::isfinite(b.a));
    CHECK(b.mean() == doctest::Approx(0.25).epsilon(1e-3));
  }
}

TEST_CASE("parameter blending") {
  const Pdf old = Pdf::gaussian(1.0, 0.25);
  const Pdf fitted = Pdf::gaussian(2.0, 0.05);
  CHECK(blend_update(old, fitted, 1.0) == old);
  CHECK(blend_update(old, fitted, 0.0) == fitted);
  const Pdf mid = blend_update(old, fitted, 0.5);
  CHECK(mid.a == doctest::Approx(1.5));
  CHECK(mid.b == doctest::Approx(0.15));
  // idempotent on equal inputs, monotone in the blend weight
  CHECK(blend_update(old, old, 0.37) == old);
  double prev = fitted.a;
  for (double w : {0.25, 0.5, 0.75, 1.0}) {
    const double cur = blend_update(old, fitted, w).a;
    CHECK(cur <= prev);  // moves from fitted toward old as the weight grows
    prev = cur;
  }
  CHECK_THROWS_AS(blend_update(old, Pdf::beta(1, 1), 0.5), parameter_error);
}

TEST_CASE("initializers") {
  PdfInitializer gauss{PdfKind::gaussian, 0.25};
  const Pdf g = gauss.make(2.5);
  CHECK(g.a == doctest::Approx(2.5));
  CHECK(g.b == doctest::Approx(0.25));

  PdfInitializer gamma_init{PdfKind::gamma, 0.01};
  const Pdf w = gamma_init.make(1.99);
  CHECK(w.kind == PdfKind::gamma);
  CHECK((w.a - 1.0) * w.b == doctest::Approx(1.99).epsilon(1e-9));  // mode at the observation
  CHECK(w.a == doctest::Approx(200.0).epsilon(1e-6));
  const Pdf w0 = gamma_init.make(0.0);
  CHECK(w0.a == doctest::Approx(1.0));  // zero-adjacent observation: flattest member

  PdfInitializer beta_init{PdfKind::beta, 6.0};
  const Pdf t = beta_init.make(0.5);
  CHECK(t.a == doctest::Approx(t.b));  // symmetric, mode at one half
  CHECK((t.a - 1.0) / (t.a + t.b - 2.0) == doctest::Approx(0.5));
  const Pdf t1 = beta_init.make(1.0);
  CHECK(t1.a == doctest::Approx(5.0));
  CHECK(t1.b == doctest::Approx(1.0));
}
