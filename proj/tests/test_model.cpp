#include <doctest.h>

#include "switchrate/config.hpp"
#include "switchrate/errors.hpp"
#include "switchrate/model.hpp"

using namespace switchrate;

TEST_CASE("derived coefficients") {
  SystemParams p;
  p.kappa2 = 1.0;
  auto c = derive_coeffs(p);
  CHECK(c.k1 == cplx(0.0, 0.0));
  CHECK(c.k2 == cplx(0.0, 1.0));

  p = {};
  p.delta = 3.165;
  p.kerr = 0.05;
  p.kappa1 = 1.0;
  c = derive_coeffs(p);
  CHECK(c.k1 == cplx(3.165, -0.5));
  CHECK(c.k2 == cplx(0.05, 0.0));

  p = {};
  p.delta = 0.1;
  p.kappa1 = 0.01;
  p.kappa2 = 1.0;
  c = derive_coeffs(p);
  CHECK(c.k1 == cplx(0.1, -0.005));
  CHECK(c.k2 == cplx(0.0, 1.0));
  CHECK(c.k1.imag() <= 0.0);
}

TEST_CASE("potential intent rejects vanishing k2") {
  SystemParams p;
  p.kappa1 = 1.0;
  CHECK_NOTHROW(derive_coeffs(p));
  CHECK_THROWS_AS(derive_coeffs(p, true), InvalidParams);
}

TEST_CASE("validation") {
  SystemParams p;
  p.kappa1 = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p.kappa1 = 0.0;
  p.kappa_phi = -0.1;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p.kappa_phi = 0.0;
  p.lambda1 = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS(p.validate(), InvalidParams);
}

TEST_CASE("presets") {
  const SystemParams k = preset(Preset::kerr_oscillator);
  CHECK(k.delta == doctest::Approx(3.165));
  CHECK(k.kerr == doctest::Approx(0.1));
  CHECK(std::abs(k.lambda1) == doctest::Approx(5.0));
  CHECK(k.kappa2 == 0.0);
  CHECK(k.lambda2 == cplx{});
  CHECK(k.lambda3 == cplx{});
  CHECK(k.unit_name() == "kappa1");

  const SystemParams c = preset(Preset::dissipative_cat);
  CHECK(c.kappa2 == 1.0);
  CHECK(c.kappa1 == doctest::Approx(0.01));
  CHECK(std::abs(c.lambda2 - cplx(0.0, 2.0)) < 1e-15);
  CHECK(c.unit_name() == "kappa2");

  PresetArgs a;
  a.kappa_phi = 0.4;
  const SystemParams d = preset(Preset::dephased_cat, a);
  CHECK(d.kappa2 == 1.0);
  CHECK(d.kappa_phi == doctest::Approx(0.4));

  a = {};
  a.imperfection = Imperfection::lambda3;
  a.imperfection_strength = 0.1;
  a.imperfection_phase = 0.5;
  const SystemParams l = preset(Preset::dissipative_cat, a);
  CHECK(std::abs(l.lambda3 - std::polar(0.1, 0.5)) < 1e-15);

  CHECK_THROWS_AS(parse_preset("nope"), InvalidParams);
  CHECK(parse_preset(preset_name(Preset::dephased_cat)) == Preset::dephased_cat);
}

TEST_CASE("alpha0 round trip") {
  for (cplx c : {cplx(4.0, 0.0), cplx(-1.5, 2.25), cplx(0.0, 1e-3)}) {
    for (double k2 : {1.0, 0.37, 12.0}) {
      const cplx l2 = drive_from_alpha0_sq(k2, c);
      CHECK(std::abs(alpha0_sq_from_drive(k2, l2) - c) <= 4e-16 * std::abs(c));
    }
  }
  SystemParams p;
  p.kappa2 = 2.0;
  p.alpha0_sq = cplx(4.0, 0.0);
  p.lambda2 = cplx(0.1, 0.0);
  const SystemParams q = to_drive_form(p);
  CHECK(!q.alpha0_sq);
  CHECK(std::abs(q.lambda2 - cplx(0.1, 4.0)) < 1e-15);
}

TEST_CASE("provenance hash") {
  const SystemParams p = preset(Preset::dissipative_cat);
  CHECK(params_hash(p, 30) == params_hash(p, 30));
  CHECK(params_hash(p, 30) != params_hash(p, 35));
  SystemParams q = p;
  q.delta = 1e-12;
  CHECK(params_hash(p, 30) != params_hash(q, 30));
  CHECK(params_hash(p).size() == 16);
}

TEST_CASE("config overrides") {
  const Config cfg = parse_config(
      "delta = 0.2\n"
      "[dissipative_cat]\n"
      "lambda3_abs = 0.1\n"
      "lambda3_phase = 1.5707963267948966\n"
      "alpha0_sq_re = 3\n");
  SystemParams p = preset(Preset::dissipative_cat);
  apply_overrides(p, *cfg.section(""));
  apply_overrides(p, *cfg.section("dissipative_cat"));
  CHECK(p.delta == doctest::Approx(0.2));
  CHECK(std::abs(p.lambda3 - cplx(0.0, 0.1)) < 1e-15);
  REQUIRE(p.alpha0_sq);
  CHECK(*p.alpha0_sq == cplx(3.0, 0.0));

  KeyValues both{{"lambda1_re", "1"}, {"lambda1_abs", "2"}};
  CHECK_THROWS_AS(apply_overrides(p, both), InvalidParams);
  KeyValues bad{{"kappa1", "fast"}};
  CHECK_THROWS_AS(apply_overrides(p, bad), InvalidParams);
  KeyValues neg{{"kappa2", "-1"}};
  CHECK_THROWS_AS(apply_overrides(p, neg), InvalidParams);
}
