#pragma once

// Synthetic quasi-morphism models: a finitely generated group presented by a
// confluent rewriting table, with subadditive conjugation-invariant cost data
// c, a fragmentation norm, and a displacing element f. Homogenizing c along
// powers with a two-sided Fekete bracket gives an interval estimate for
// mu(phi) = -vol * lim c(phi^k)/k, and the check routines test the controlled
// additivity bounds that the cost axioms force on mu.

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qs/mesh.hpp"  // InputError, InvariantError
#include "qs/rational.hpp"

namespace qs {

// A letter is +(i+1) for generator i and -(i+1) for its inverse; a word is a
// sequence of letters, the empty word being the identity.
using Word = std::vector<int>;

struct RewriteSystem {
  std::vector<std::string> generators;  // single lowercase letters
  std::vector<std::pair<Word, Word>> rules;

  // free reduction plus leftmost rule application, run to a fixed point
  Word reduce(Word w) const;
};

// Parses relation strings "lhs=rhs" into rules, requires every rule to shrink
// words in the length-lexicographic order, and rejects tables whose critical
// pairs (including overlaps with free cancellation) fail to converge.
RewriteSystem build_rewrite_system(const std::vector<std::string>& generators,
                                   const std::vector<std::string>& relations);

// "aB" means a * b^-1; "1" is the identity. Formatting inverts the parse.
Word parse_word(const RewriteSystem& rw, const std::string& text);
std::string format_word(const RewriteSystem& rw, const Word& w);
Word inverse_word(const Word& w);

// All distinct canonical forms of words of length at most max_length, in
// length-lexicographic order (identity first).
std::vector<Word> enumerate_words(const RewriteSystem& rw, int max_length);

struct SpectralModel {
  std::string name;
  RewriteSystem rw;

  // Formula-backed models evaluate on raw words; table-backed models look up
  // the canonical form and report a gap when the entry is missing.
  std::function<Rational(const Word&)> c_fn;
  std::function<long long(const Word&)> norm_fn;
  std::function<Rational(const Word&, long long)> c_power_fn;  // c(w^k) shortcut
  std::map<std::string, Rational> c_table;
  std::map<std::string, long long> norm_table;

  Word f;        // displacing element
  Rational vol;  // positive volume normalization

  Rational c(const Word& w) const;
  long long norm(const Word& w) const;
  Rational c_power(const Word& w, long long k) const;

  // C = 2c(f) + 2c(f^-1), the constant in every displacement bound below
  Rational quasi_constant() const;
};

// Builtin model names: "abelian" (rank-2 free abelian group, additive cost),
// "noisy-linear" (same group, additive cost plus a jump off the identity),
// "free-toy" (free group of rank 2, cost read off the abelianization).
SpectralModel builtin_model(const std::string& name);

// {"generators": [...], "relations": [...], "c": {word: "p/q"},
//  "norm": {word: n}, "f": word, "vol": "p/q"}
SpectralModel model_from_json(const std::string& text);

// Checks the cost axioms on every word pair it can evaluate (all canonical
// words up to sample_length for formula models, all table entries otherwise):
// the triangle inequality, conjugation invariance, the displacement bound
// 0 <= c(phi) + c(phi^-1) <= C on norm-one elements, and the sandwich
// c(phi) + c(psi) - C <= c(phi psi). Throws InputError with a witness pair on
// the first violation. Model constructors call this themselves.
void validate_model(const SpectralModel& model, int sample_length = 4);

struct FeketeResult {
  Rational estimate;  // min over k <= k_used of a_k / k
  long long arg_k = 0;
  long long k_used = 0;
};

// a holds a_1 .. a_n. Verifies a_{j+k} <= a_j + a_k for every pair with
// j + k <= k_max and throws InputError naming the witness pair otherwise; the
// returned minimum then bounds the limit of a_k / k from above.
FeketeResult fekete_limit(const std::vector<Rational>& a, int k_max);

struct HomogenizationResult {
  Rational mu;
  long long k_used = 0;
  Rational error_bound;  // nonnegative, non-increasing in k_used
};

// mu(phi) = -vol * lim c(phi^k)/k, estimated as the midpoint of the bracket
// [-vol * min_k c(phi^k)/k, vol * min_k c(phi^-k)/k] whose ends the cost
// axioms certify; the bracket half-width is the error bound.
HomogenizationResult homogenize(const SpectralModel& model, const Word& phi,
                                int k_max);

struct CqaReport {
  int max_word_length = 0;
  long long k_max = 0;
  long long pairs_checked = 0;
  Rational max_gap;        // largest |mu(uv) - mu(u) - mu(v)| seen
  double max_ratio = 0.0;  // largest gap / bound over pairs with bound > 0
  struct Violation {
    std::string phi, psi;
    Rational gap, allowed;
  };
  std::vector<Violation> violations;
  long long aa_product_samples = 0;  // product-of-fragments inequality
  long long aa_power_samples = 0;    // its power form
  std::vector<std::string> aa_violations;
};

// For every ordered pair of non-identity canonical words u, v of length at
// most max_word_length, checks
//   |mu(uv) - mu(u) - mu(v)| <= vol * 2C * min(2|u|-1, 2|v|-1)
// up to the three homogenization error bounds, and spot-checks the two
// finite-level inequalities behind that bound on seeded tuples of norm-one
// elements. max_ratio reports how close the gaps come to the bound.
CqaReport check_controlled_quasi_additivity(const SpectralModel& model,
                                            int max_word_length, int k_max);

struct AbelianReport {
  bool commuting = true;
  std::string witness_u, witness_v;  // unequal products when !commuting
  long long pairs_checked = 0;
  Rational max_gap;        // largest additivity defect |mu(uv)-mu(u)-mu(v)|
  Rational max_tolerance;  // largest combined error bound allowed to a pair
  std::vector<std::string> violations;
};

// Restricting mu to a commuting set of generators must give a homomorphism:
// first verifies that the chosen generators commute under rewriting (returning
// the offending products otherwise), then checks additivity of mu on all
// pairs from the generated subgroup up to max_word_length, within the summed
// homogenization error bounds.
AbelianReport check_abelian_restriction(const SpectralModel& model,
                                        const std::vector<std::string>& subset,
                                        int max_word_length, int k_max);

}  // namespace qs
