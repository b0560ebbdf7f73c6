#include <doctest.h>

#include "qs/qm.hpp"

#include <string>
#include <vector>

using namespace qs;

namespace {

Rational rat(const std::string& s) { return parse_rational(s); }

Word w(const SpectralModel& m, const std::string& text) {
  return parse_word(m.rw, text);
}

std::string fmt(const SpectralModel& m, const Word& word) {
  return format_word(m.rw, word);
}

// independent reference for the smallest j with 2^j >= n
long long ceil_log2(long long n) {
  long long j = 0;
  while ((1LL << j) < n) ++j;
  return j;
}

// what an InputError thrown by fn says; empty if fn returns normally
template <typename F>
std::string rejection(F&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

// a complete additive-cost table on the rank-2 abelian group, words up to
// length two: c(a^m b^n) = m/2 + n/3 + 1/4 off the identity
const char* kTinyTableModel = R"({
  "generators": ["a", "b"],
  "relations": ["ba=ab", "bA=Ab", "Ba=aB", "BA=AB"],
  "c": {
    "1": "0",
    "a": "3/4", "A": "-1/4", "b": "7/12", "B": "-1/12",
    "aa": "5/4", "AA": "-3/4", "bb": "11/12", "BB": "-5/12",
    "ab": "13/12", "aB": "5/12", "Ab": "1/12", "AB": "-7/12"
  },
  "norm": {
    "a": 1, "A": 1, "b": 1, "B": 1,
    "aa": 2, "AA": 2, "bb": 2, "BB": 2,
    "ab": 1, "aB": 1, "Ab": 1, "AB": 1
  },
  "f": "a",
  "vol": "1"
})";

}  // namespace

TEST_CASE("words reduce to canonical forms deterministically") {
  SpectralModel noisy = builtin_model("noisy-linear");

  CHECK(fmt(noisy, noisy.rw.reduce(w(noisy, "abA"))) == "b");
  CHECK(fmt(noisy, noisy.rw.reduce(w(noisy, "Baab"))) == "aa");
  CHECK(fmt(noisy, noisy.rw.reduce(w(noisy, "aA"))) == "1");
  CHECK(fmt(noisy, noisy.rw.reduce(w(noisy, "bABa"))) == "1");
  CHECK(parse_word(noisy.rw, "1").empty());
  CHECK(fmt(noisy, Word{}) == "1");

  // round trip through parse and format
  Word u = w(noisy, "aaB");
  CHECK(parse_word(noisy.rw, fmt(noisy, u)) == u);

  // inverses reverse and flip every letter
  CHECK(fmt(noisy, inverse_word(w(noisy, "ab"))) == "BA");
  CHECK(inverse_word(Word{}).empty());

  CHECK_THROWS_AS(parse_word(noisy.rw, "ax"), InputError);
  CHECK_THROWS_AS(parse_word(noisy.rw, "a b"), InputError);

  // the free model performs free reduction only
  SpectralModel toy = builtin_model("free-toy");
  CHECK(fmt(toy, toy.rw.reduce(w(toy, "abA"))) == "abA");
  CHECK(fmt(toy, toy.rw.reduce(w(toy, "abBA"))) == "1");
}

TEST_CASE("rewriting tables must be confluent and reducing") {
  // a rule whose right side is larger cannot terminate and is rejected
  CHECK_THROWS_AS(build_rewrite_system({"a", "b"}, {"ab=ba"}), InputError);

  // commuting b past a but not past A leaves a divergent critical pair
  CHECK_THROWS_AS(build_rewrite_system({"a", "b"}, {"ba=ab"}), InputError);

  // missing the c-past-a rule: the overlap word cba rewrites two ways
  CHECK_THROWS_AS(build_rewrite_system({"a", "b", "c"},
                                       {"ba=ab", "bA=Ab", "Ba=aB", "BA=AB",
                                        "cb=bc", "cB=Bc", "Cb=bC", "CB=BC"}),
                  InputError);

  // the full commutation table is confluent
  RewriteSystem rw =
      build_rewrite_system({"a", "b"}, {"ba=ab", "bA=Ab", "Ba=aB", "BA=AB"});
  CHECK(rw.rules.size() == 4);

  CHECK_THROWS_AS(build_rewrite_system({"a", "a"}, {}), InputError);
  CHECK_THROWS_AS(build_rewrite_system({"Q"}, {}), InputError);
  CHECK_THROWS_AS(build_rewrite_system({}, {}), InputError);
  CHECK_THROWS_AS(build_rewrite_system({"a"}, {"a=aa=a"}), InputError);
}

TEST_CASE("canonical word enumeration counts the group balls") {
  SpectralModel noisy = builtin_model("noisy-linear");
  // a^m b^n with |m| + |n| <= L: 1, 5, 13, 25, 41, 61, 85
  CHECK(enumerate_words(noisy.rw, 0).size() == 1);
  CHECK(enumerate_words(noisy.rw, 1).size() == 5);
  CHECK(enumerate_words(noisy.rw, 4).size() == 41);
  CHECK(enumerate_words(noisy.rw, 6).size() == 85);

  SpectralModel toy = builtin_model("free-toy");
  // free group balls: 1 + 4 * (3^L - 1) / 2
  CHECK(enumerate_words(toy.rw, 1).size() == 5);
  CHECK(enumerate_words(toy.rw, 2).size() == 17);
  CHECK(enumerate_words(toy.rw, 3).size() == 53);

  std::vector<Word> words = enumerate_words(noisy.rw, 2);
  CHECK(words.front().empty());  // identity first
  for (const Word& u : words) CHECK(noisy.rw.reduce(u) == u);
}

TEST_CASE("builtin models carry the documented cost data") {
  SpectralModel noisy = builtin_model("noisy-linear");
  CHECK(noisy.quasi_constant() == rat("4/3"));
  CHECK(noisy.vol == 1);
  CHECK(noisy.c(w(noisy, "1")) == 0);
  CHECK(noisy.c(w(noisy, "a")) == rat("16/21"));
  CHECK(noisy.c(w(noisy, "A")) == rat("-2/21"));
  CHECK(noisy.c(w(noisy, "ab")) == rat("38/105"));
  CHECK(noisy.norm(w(noisy, "a")) == 1);
  CHECK(noisy.norm(w(noisy, "aab")) == 2);
  CHECK(noisy.norm(w(noisy, "abab")) == 2);

  SpectralModel plain = builtin_model("abelian");
  CHECK(plain.quasi_constant() == 0);
  CHECK(plain.c(w(plain, "a")) == rat("3/7"));
  CHECK(plain.c(w(plain, "ab")) == rat("1/35"));

  SpectralModel toy = builtin_model("free-toy");
  CHECK(toy.quasi_constant() == rat("4/3"));
  CHECK(toy.c(w(toy, "abAB")) == 0);  // cost sees only the abelianization
  CHECK(toy.norm(w(toy, "abAB")) == 1);
  CHECK(toy.c(w(toy, "ab")) == noisy.c(w(noisy, "ab")));

  CHECK_THROWS_AS(builtin_model("quantum"), InputError);
}

TEST_CASE("model invariants reject forged tables at load") {
  // triangle inequality: c(ab) exceeds c(a) + c(b)
  std::string msg = rejection([] {
    model_from_json(R"({
        "generators": ["a", "b"], "relations": [],
        "c": {"1": "0", "a": "1", "A": "1", "b": "1", "B": "1", "ab": "3"},
        "norm": {"a": 1, "A": 1, "b": 1, "B": 1, "ab": 2},
        "f": "a", "vol": "1"})");
  });
  CHECK(msg.find("triangle") != std::string::npos);
  CHECK(msg.find("ab") != std::string::npos);

  // conjugation invariance: c(b a b^-1) != c(a)
  msg = rejection([] {
    model_from_json(R"({
        "generators": ["a", "b"], "relations": [],
        "c": {"1": "0", "a": "1", "A": "1", "b": "1", "B": "1", "baB": "2"},
        "norm": {"a": 1, "A": 1, "b": 1, "B": 1, "baB": 1},
        "f": "a", "vol": "1"})");
  });
  CHECK(msg.find("conjugation") != std::string::npos);

  // displacement bound: c(a) + c(A) = 6 exceeds C = 2c(b) + 2c(B) = 2
  msg = rejection([] {
    model_from_json(R"({
        "generators": ["a", "b"], "relations": [],
        "c": {"1": "0", "a": "3", "A": "3", "b": "1/2", "B": "1/2"},
        "norm": {"a": 1, "A": 1, "b": 1, "B": 1},
        "f": "b", "vol": "1"})");
  });
  CHECK(msg.find("displacement") != std::string::npos);

  // malformed inputs
  CHECK_THROWS_AS(model_from_json("{"), InputError);
  CHECK_THROWS_AS(model_from_json(R"({"generators": ["a"]})"), InputError);
  CHECK_THROWS_AS(
      model_from_json(R"({
        "generators": ["a"], "relations": [],
        "c": {"1": "0", "a": 1, "A": "1"},
        "norm": {"a": 1, "A": 1}, "f": "a", "vol": "1"})"),
      InputError);  // numeric cost cell
  CHECK_THROWS_AS(
      model_from_json(R"({
        "generators": ["a"], "relations": [],
        "c": {"1": "0", "a": "1", "A": "1"},
        "norm": {"a": 0, "A": 1}, "f": "a", "vol": "1"})"),
      InputError);  // norm must be positive
  CHECK_THROWS_AS(
      model_from_json(R"({
        "generators": ["a"], "relations": [],
        "c": {"1": "0", "a": "1", "A": "1"},
        "norm": {"a": 1, "A": 1}, "f": "a", "vol": "0"})"),
      InputError);  // volume must be positive
  CHECK_THROWS_AS(
      model_from_json(R"({
        "generators": ["a"], "relations": [],
        "c": {"1": "0", "A": "1"},
        "norm": {"a": 1, "A": 1}, "f": "a", "vol": "1"})"),
      InputError);  // f needs a cost entry

  // a consistent table loads and reports its constant
  SpectralModel tiny = model_from_json(kTinyTableModel);
  CHECK(tiny.quasi_constant() == 1);
  CHECK(tiny.c(w(tiny, "ba")) == rat("13/12"));  // canonical lookup
  CHECK_THROWS_AS(tiny.c(w(tiny, "aaa")), InputError);
}

TEST_CASE("fekete limits match the frozen sequences") {
  auto seq = [](int n, auto f) {
    std::vector<Rational> a;
    for (int k = 1; k <= n; ++k) a.push_back(f(k));
    return a;
  };

  // a_k = k + 1 drifts to 1 from above, minimum at the right end
  std::vector<Rational> drift = seq(128, [](int k) { return Rational(k + 1); });
  FeketeResult fr = fekete_limit(drift, 64);
  CHECK(fr.estimate == rat("65/64"));
  CHECK(fr.arg_k == 64);
  CHECK(fr.k_used == 64);
  FeketeResult fr2 = fekete_limit(drift, 128);
  CHECK(fr2.estimate == rat("129/128"));
  CHECK(fr2.estimate <= fr.estimate);  // monotone in the horizon

  // exactly linear: the minimum is the slope at every k, first index wins
  std::vector<Rational> lin = seq(40, [](int k) { return Rational(3 * k); });
  FeketeResult fl = fekete_limit(lin, 40);
  CHECK(fl.estimate == 3);
  CHECK(fl.arg_k == 1);

  // logarithmic excess: minimum just before the next power of two
  std::vector<Rational> logd =
      seq(128, [](int k) { return Rational(k + ceil_log2(k + 1)); });
  FeketeResult fg = fekete_limit(logd, 128);
  CHECK(fg.estimate == rat("134/127"));
  CHECK(fg.arg_k == 127);
  CHECK(to_double(fg.estimate) < 1.1);  // within 0.1 of the true limit 1
  // non-increasing as the horizon grows
  Rational prev;
  bool first = true;
  for (int km : {16, 32, 64, 128}) {
    FeketeResult step = fekete_limit(logd, km);
    if (!first) CHECK(step.estimate <= prev);
    prev = step.estimate;
    first = false;
  }

  // subadditivity violations are rejected with the witness pair
  std::vector<Rational> bad{Rational(1), Rational(3)};
  std::string msg = rejection([&] { fekete_limit(bad, 2); });
  CHECK(msg.find("a(1)") != std::string::npos);
  CHECK(msg.find("a(2)") != std::string::npos);

  CHECK_THROWS_AS(fekete_limit({}, 1), InputError);
  CHECK_THROWS_AS(fekete_limit(drift, 0), InputError);
  CHECK_THROWS_AS(fekete_limit(drift, 129), InputError);
}

TEST_CASE("homogenization brackets the exact slope") {
  SpectralModel noisy = builtin_model("noisy-linear");

  HomogenizationResult ha = homogenize(noisy, w(noisy, "a"), 256);
  CHECK(ha.mu == rat("-3/7"));
  CHECK(ha.error_bound == rat("1/768"));  // jump size over the horizon
  CHECK(ha.k_used == 256);

  HomogenizationResult hA = homogenize(noisy, w(noisy, "A"), 256);
  CHECK(hA.mu == rat("3/7"));

  HomogenizationResult hab = homogenize(noisy, w(noisy, "ab"), 256);
  CHECK(hab.mu == rat("-1/35"));
  CHECK(hab.error_bound == rat("1/768"));

  // the error bound shrinks with the horizon, the midpoint stays exact
  HomogenizationResult coarse = homogenize(noisy, w(noisy, "a"), 64);
  CHECK(coarse.mu == rat("-3/7"));
  CHECK(coarse.error_bound == rat("1/192"));
  CHECK(ha.error_bound <= coarse.error_bound);

  // semi-homogeneity is exact here
  HomogenizationResult h3 = homogenize(noisy, w(noisy, "aaa"), 256);
  CHECK(h3.mu == 3 * ha.mu);

  // identity has slope zero with no uncertainty
  HomogenizationResult hid = homogenize(noisy, Word{}, 256);
  CHECK(hid.mu == 0);
  CHECK(hid.error_bound == 0);

  // the strictly additive model is certain at every horizon
  SpectralModel plain = builtin_model("abelian");
  HomogenizationResult pa = homogenize(plain, w(plain, "a"), 16);
  CHECK(pa.mu == rat("-3/7"));
  CHECK(pa.error_bound == 0);

  // commutators cost nothing in the free model
  SpectralModel toy = builtin_model("free-toy");
  HomogenizationResult hc = homogenize(toy, w(toy, "abAB"), 64);
  CHECK(hc.mu == 0);
  CHECK(hc.error_bound == 0);

  // table models run out of entries instead of guessing
  SpectralModel tiny = model_from_json(kTinyTableModel);
  HomogenizationResult ht = homogenize(tiny, w(tiny, "a"), 2);
  CHECK(ht.mu == rat("-1/2"));
  CHECK(ht.error_bound == rat("1/8"));
  CHECK_THROWS_AS(homogenize(tiny, w(tiny, "a"), 3), InputError);

  CHECK_THROWS_AS(homogenize(noisy, w(noisy, "a"), 0), InputError);
}

TEST_CASE("controlled quasi-additivity holds with zero slack on the builtins") {
  SpectralModel noisy = builtin_model("noisy-linear");
  CqaReport r = check_controlled_quasi_additivity(noisy, 6, 128);
  CHECK(r.pairs_checked == 84 * 84);
  CHECK(r.max_gap == 0);  // mu is exactly linear on this family
  CHECK(r.max_ratio == 0.0);
  CHECK(r.violations.empty());
  CHECK(r.aa_product_samples > 0);
  CHECK(r.aa_power_samples > 0);
  CHECK(r.aa_violations.empty());

  // the additive model satisfies the bound with C = 0
  SpectralModel plain = builtin_model("abelian");
  CqaReport rp = check_controlled_quasi_additivity(plain, 4, 64);
  CHECK(rp.pairs_checked == 40 * 40);
  CHECK(rp.max_gap == 0);
  CHECK(rp.violations.empty());

  SpectralModel toy = builtin_model("free-toy");
  CqaReport rt = check_controlled_quasi_additivity(toy, 2, 64);
  CHECK(rt.pairs_checked == 16 * 16);
  CHECK(rt.max_gap == 0);
  CHECK(rt.violations.empty());

  // identical runs produce identical reports
  CqaReport again = check_controlled_quasi_additivity(noisy, 6, 128);
  CHECK(again.pairs_checked == r.pairs_checked);
  CHECK(again.max_gap == r.max_gap);
  CHECK(again.max_ratio == r.max_ratio);
  CHECK(again.aa_product_samples == r.aa_product_samples);
  CHECK(again.aa_power_samples == r.aa_power_samples);

  CHECK_THROWS_AS(check_controlled_quasi_additivity(noisy, 0, 64), InputError);
  CHECK_THROWS_AS(check_controlled_quasi_additivity(noisy, 6, 0), InputError);
}

TEST_CASE("abelian restrictions are homomorphisms") {
  SpectralModel noisy = builtin_model("noisy-linear");

  AbelianReport full = check_abelian_restriction(noisy, {"a", "b"}, 5, 128);
  CHECK(full.commuting);
  CHECK(full.pairs_checked == 60 * 60);
  CHECK(full.max_gap == 0);
  CHECK(full.violations.empty());

  // a single generator spans a cyclic subgroup; mu(a^m) = m mu(a) exactly
  AbelianReport cyc = check_abelian_restriction(noisy, {"a"}, 6, 128);
  CHECK(cyc.commuting);
  CHECK(cyc.pairs_checked == 12 * 12);
  CHECK(cyc.max_gap == 0);

  // free generators do not commute; the witness shows both products
  SpectralModel toy = builtin_model("free-toy");
  AbelianReport nc = check_abelian_restriction(toy, {"a", "b"}, 4, 64);
  CHECK_FALSE(nc.commuting);
  CHECK(nc.witness_u == "ab");
  CHECK(nc.witness_v == "ba");
  CHECK(nc.pairs_checked == 0);

  AbelianReport tc = check_abelian_restriction(toy, {"b"}, 4, 64);
  CHECK(tc.commuting);
  CHECK(tc.max_gap == 0);

  CHECK_THROWS_AS(check_abelian_restriction(noisy, {}, 4, 64), InputError);
  CHECK_THROWS_AS(check_abelian_restriction(noisy, {"z"}, 4, 64), InputError);
}
