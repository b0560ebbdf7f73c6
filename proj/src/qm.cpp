#include "qs/qm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qs {

namespace {

// letters sort by generator index, each generator just before its inverse,
// so the word order is length first and then this rank
int letter_rank(int l) { return l > 0 ? 2 * (l - 1) : 2 * (-l - 1) + 1; }

bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return letter_rank(a[i]) < letter_rank(b[i]);
  return false;
}

struct ShortlexLess {
  bool operator()(const Word& a, const Word& b) const {
    return shortlex_less(a, b);
  }
};

void free_reduce(Word& w) {
  Word out;
  out.reserve(w.size());
  for (int l : w) {
    if (!out.empty() && out.back() == -l) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  w = std::move(out);
}

Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<long long> abelianized(int n_gens, const Word& w) {
  std::vector<long long> v(static_cast<size_t>(n_gens), 0);
  for (int l : w) {
    if (l > 0) {
      ++v[static_cast<size_t>(l - 1)];
    } else {
      --v[static_cast<size_t>(-l - 1)];
    }
  }
  return v;
}

// rules plus the implicit free cancellations, the rewrite relation whose
// critical pairs decide confluence
std::vector<std::pair<Word, Word>> rules_with_cancellation(
    const RewriteSystem& rw) {
  std::vector<std::pair<Word, Word>> all = rw.rules;
  for (int g = 1; g <= static_cast<int>(rw.generators.size()); ++g) {
    all.push_back({Word{g, -g}, Word{}});
    all.push_back({Word{-g, g}, Word{}});
  }
  return all;
}

void check_confluence(const RewriteSystem& rw) {
  const auto all = rules_with_cancellation(rw);
  auto complain = [&rw](const Word& peak, const Word& left, const Word& right) {
    throw InputError("rewriting rules are not confluent: \"" +
                     format_word(rw, peak) + "\" reduces to both \"" +
                     format_word(rw, left) + "\" and \"" +
                     format_word(rw, right) + "\"");
  };
  for (size_t i = 0; i < all.size(); ++i) {
    const Word& l1 = all[i].first;
    const Word& r1 = all[i].second;
    for (size_t j = 0; j < all.size(); ++j) {
      const Word& l2 = all[j].first;
      const Word& r2 = all[j].second;
      // proper overlap: a suffix of l1 is a prefix of l2
      size_t kmax = std::min(l1.size(), l2.size()) - 1;
      for (size_t k = 1; k <= kmax; ++k) {
        if (!std::equal(l1.end() - static_cast<long>(k), l1.end(), l2.begin()))
          continue;
        Word peak = concat(l1, Word(l2.begin() + static_cast<long>(k), l2.end()));
        Word via1 = rw.reduce(
            concat(r1, Word(l2.begin() + static_cast<long>(k), l2.end())));
        Word via2 = rw.reduce(
            concat(Word(l1.begin(), l1.end() - static_cast<long>(k)), r2));
        if (via1 != via2) complain(peak, via1, via2);
      }
      // containment: l2 occurs inside l1
      if (l2.size() <= l1.size()) {
        for (size_t p = 0; p + l2.size() <= l1.size(); ++p) {
          if (i == j && p == 0 && l1.size() == l2.size()) continue;
          if (!std::equal(l2.begin(), l2.end(),
                          l1.begin() + static_cast<long>(p)))
            continue;
          Word via1 = rw.reduce(r1);
          Word outer = Word(l1.begin(), l1.begin() + static_cast<long>(p));
          outer = concat(outer, r2);
          outer = concat(
              outer, Word(l1.begin() + static_cast<long>(p + l2.size()),
                          l1.end()));
          Word via2 = rw.reduce(outer);
          if (via1 != via2) complain(l1, via1, via2);
        }
      }
    }
  }
}

// shared mu computation with a per-run cache keyed on canonical words
struct MuCache {
  const SpectralModel& model;
  int k_max;
  std::map<Word, HomogenizationResult> memo;

  const HomogenizationResult& mu(const Word& canonical) {
    auto it = memo.find(canonical);
    if (it != memo.end()) return it->second;
    HomogenizationResult r = homogenize(model, canonical, k_max);
    return memo.emplace(canonical, std::move(r)).first->second;
  }
};

Rational rational_abs(const Rational& x) { return x < 0 ? -x : x; }

std::string describe_word(const SpectralModel& m, const Word& w) {
  return format_word(m.rw, w);
}

}  // namespace

Word RewriteSystem::reduce(Word w) const {
  free_reduce(w);
  long long guard = 0;
  for (;;) {
    bool applied = false;
    for (size_t pos = 0; pos < w.size() && !applied; ++pos) {
      for (const auto& rule : rules) {
        const Word& lhs = rule.first;
        if (lhs.empty() || pos + lhs.size() > w.size()) continue;
        if (!std::equal(lhs.begin(), lhs.end(),
                        w.begin() + static_cast<long>(pos)))
          continue;
        Word next(w.begin(), w.begin() + static_cast<long>(pos));
        next.insert(next.end(), rule.second.begin(), rule.second.end());
        next.insert(next.end(), w.begin() + static_cast<long>(pos + lhs.size()),
                    w.end());
        w = std::move(next);
        applied = true;
        break;
      }
    }
    if (!applied) break;
    free_reduce(w);
    if (++guard > 200000)
      throw InvariantError("rewriting exceeded its step budget");
  }
  return w;
}

RewriteSystem build_rewrite_system(const std::vector<std::string>& generators,
                                   const std::vector<std::string>& relations) {
  if (generators.empty())
    throw InputError("a model needs at least one generator");
  RewriteSystem rw;
  rw.generators = generators;
  for (const std::string& g : generators) {
    if (g.size() != 1 || !std::islower(static_cast<unsigned char>(g[0])))
      throw InputError("generator names must be single lowercase letters, got \"" +
                       g + "\"");
  }
  for (size_t i = 0; i < generators.size(); ++i)
    for (size_t j = i + 1; j < generators.size(); ++j)
      if (generators[i] == generators[j])
        throw InputError("duplicate generator \"" + generators[i] + "\"");

  for (const std::string& rel : relations) {
    size_t eq = rel.find('=');
    if (eq == std::string::npos || rel.find('=', eq + 1) != std::string::npos)
      throw InputError("relation \"" + rel +
                       "\" must have the form lhs=rhs with a single '='");
    Word lhs = parse_word(rw, rel.substr(0, eq));
    Word rhs = parse_word(rw, rel.substr(eq + 1));
    if (lhs.empty())
      throw InputError("relation \"" + rel + "\" rewrites the identity");
    if (!shortlex_less(rhs, lhs))
      throw InputError(
          "relation \"" + rel +
          "\" does not shrink words: the right side must be smaller in the "
          "length-lexicographic order");
    rw.rules.push_back({std::move(lhs), std::move(rhs)});
  }
  check_confluence(rw);
  return rw;
}

Word parse_word(const RewriteSystem& rw, const std::string& text) {
  if (text == "1") return Word{};
  if (text.empty())
    throw InputError("empty word; write the identity as \"1\"");
  Word w;
  w.reserve(text.size());
  for (char ch : text) {
    bool inverse = std::isupper(static_cast<unsigned char>(ch)) != 0;
    char base = inverse
                    ? static_cast<char>(std::tolower(static_cast<unsigned char>(ch)))
                    : ch;
    int idx = -1;
    for (size_t i = 0; i < rw.generators.size(); ++i) {
      if (rw.generators[i][0] == base) {
        idx = static_cast<int>(i);
        break;
      }
    }
    if (idx < 0)
      throw InputError(std::string("unknown generator letter '") + ch +
                       "' in word \"" + text + "\"");
    w.push_back(inverse ? -(idx + 1) : idx + 1);
  }
  return w;
}

std::string format_word(const RewriteSystem& rw, const Word& w) {
  if (w.empty()) return "1";
  std::string out;
  out.reserve(w.size());
  for (int l : w) {
    size_t idx = static_cast<size_t>(l > 0 ? l - 1 : -l - 1);
    if (idx >= rw.generators.size())
      throw InvariantError("word letter outside the generator range");
    char ch = rw.generators[idx][0];
    out.push_back(l > 0 ? ch
                        : static_cast<char>(
                              std::toupper(static_cast<unsigned char>(ch))));
  }
  return out;
}

Word inverse_word(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(-*it);
  return out;
}

std::vector<Word> enumerate_words(const RewriteSystem& rw, int max_length) {
  if (max_length < 0) throw InputError("word length bound must be nonnegative");
  const int n = static_cast<int>(rw.generators.size());
  double raw = 1.0;
  double layer = 1.0;
  for (int k = 1; k <= max_length; ++k) {
    layer *= (k == 1 ? 2.0 * n : 2.0 * n - 1.0);
    raw += layer;
    if (raw > 2.0e6)
      throw InputError("word enumeration up to length " +
                       std::to_string(max_length) + " is too large");
  }

  std::set<Word, ShortlexLess> seen;
  Word cur;
  std::function<void()> visit = [&]() {
    seen.insert(rw.reduce(cur));
    if (static_cast<int>(cur.size()) == max_length) return;
    for (int g = 1; g <= n; ++g) {
      for (int l : {g, -g}) {
        if (!cur.empty() && cur.back() == -l) continue;  // freely cancels
        cur.push_back(l);
        visit();
        cur.pop_back();
      }
    }
  };
  visit();
  return std::vector<Word>(seen.begin(), seen.end());
}

Rational SpectralModel::c(const Word& w) const {
  if (c_fn) return c_fn(w);
  std::string key = format_word(rw, rw.reduce(w));
  auto it = c_table.find(key);
  if (it == c_table.end())
    throw InputError("model \"" + name + "\" has no cost entry for \"" + key +
                     "\"");
  return it->second;
}

long long SpectralModel::norm(const Word& w) const {
  if (norm_fn) return norm_fn(w);
  std::string key = format_word(rw, rw.reduce(w));
  auto it = norm_table.find(key);
  if (it == norm_table.end())
    throw InputError("model \"" + name + "\" has no norm entry for \"" + key +
                     "\"");
  return it->second;
}

Rational SpectralModel::c_power(const Word& w, long long k) const {
  if (k < 0) throw InputError("power exponents must be nonnegative");
  if (c_power_fn) return c_power_fn(w, k);
  Word acc;
  for (long long i = 0; i < k; ++i) acc = rw.reduce(concat(acc, w));
  return c(acc);
}

Rational SpectralModel::quasi_constant() const {
  return 2 * c(f) + 2 * c(inverse_word(f));
}

SpectralModel builtin_model(const std::string& name) {
  const std::vector<Rational> alpha{Rational(3, 7), Rational(-2, 5)};
  auto make = [&alpha](const std::string& label, bool relations, Rational beta,
                       bool norm_floor_one) {
    SpectralModel m;
    m.name = label;
    if (relations) {
      m.rw = build_rewrite_system({"a", "b"},
                                  {"ba=ab", "bA=Ab", "Ba=aB", "BA=AB"});
    } else {
      m.rw = build_rewrite_system({"a", "b"}, {});
    }
    const int n = 2;
    m.c_fn = [alpha, beta, n](const Word& w) {
      auto v = abelianized(n, w);
      Rational s = 0;
      bool zero = true;
      for (int i = 0; i < n; ++i) {
        s += alpha[static_cast<size_t>(i)] * v[static_cast<size_t>(i)];
        if (v[static_cast<size_t>(i)] != 0) zero = false;
      }
      if (!zero) s += beta;
      return s;
    };
    m.c_power_fn = [alpha, beta, n](const Word& w, long long k) {
      auto v = abelianized(n, w);
      Rational s = 0;
      bool zero = true;
      for (int i = 0; i < n; ++i) {
        s += alpha[static_cast<size_t>(i)] * v[static_cast<size_t>(i)] * k;
        if (v[static_cast<size_t>(i)] != 0) zero = false;
      }
      if (!zero && k > 0) s += beta;
      return s;
    };
    RewriteSystem rw_copy = m.rw;
    m.norm_fn = [rw_copy, n, norm_floor_one](const Word& w) -> long long {
      auto v = abelianized(n, w);
      long long mx = 0;
      for (int i = 0; i < n; ++i)
        mx = std::max(mx, std::llabs(v[static_cast<size_t>(i)]));
      if (norm_floor_one && mx == 0)
        return rw_copy.reduce(w).empty() ? 0 : 1;
      return mx;
    };
    m.f = parse_word(m.rw, "a");
    m.vol = 1;
    return m;
  };

  SpectralModel m;
  if (name == "abelian") {
    m = make("abelian", true, Rational(0), false);
  } else if (name == "noisy-linear") {
    m = make("noisy-linear", true, Rational(1, 3), false);
  } else if (name == "free-toy") {
    m = make("free-toy", false, Rational(1, 3), true);
  } else {
    throw InputError("unknown builtin model \"" + name +
                     "\"; available: abelian, noisy-linear, free-toy");
  }
  validate_model(m);
  return m;
}

SpectralModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("invalid model JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("model JSON must be an object");
  for (const char* key : {"generators", "relations", "c", "norm", "f", "vol"})
    if (!j.contains(key))
      throw InputError(std::string("model JSON is missing \"") + key + "\"");

  auto string_list = [&j](const char* key) {
    std::vector<std::string> out;
    if (!j[key].is_array())
      throw InputError(std::string("\"") + key + "\" must be an array");
    for (const auto& e : j[key]) {
      if (!e.is_string())
        throw InputError(std::string("\"") + key +
                         "\" entries must be strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  };

  SpectralModel m;
  m.name = "file";
  m.rw = build_rewrite_system(string_list("generators"),
                              string_list("relations"));

  if (!j["c"].is_object())
    throw InputError("\"c\" must map words to rational strings");
  for (const auto& item : j["c"].items()) {
    if (!item.value().is_string())
      throw InputError("cost for \"" + item.key() +
                       "\" must be a rational string \"p/q\"");
    Rational value;
    try {
      value = parse_rational(item.value().get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw InputError("cost for \"" + item.key() + "\": " + e.what());
    }
    std::string key = format_word(m.rw, m.rw.reduce(parse_word(m.rw, item.key())));
    if (!m.c_table.emplace(key, value).second)
      throw InputError("duplicate cost entry for canonical word \"" + key +
                       "\"");
  }

  if (!j["norm"].is_object())
    throw InputError("\"norm\" must map words to positive integers");
  for (const auto& item : j["norm"].items()) {
    if (!item.value().is_number_integer())
      throw InputError("norm for \"" + item.key() +
                       "\" must be a positive integer");
    long long value = item.value().get<long long>();
    if (value < 1)
      throw InputError("norm for \"" + item.key() +
                       "\" must be a positive integer");
    std::string key = format_word(m.rw, m.rw.reduce(parse_word(m.rw, item.key())));
    if (!m.norm_table.emplace(key, value).second)
      throw InputError("duplicate norm entry for canonical word \"" + key +
                       "\"");
  }

  if (!j["f"].is_string())
    throw InputError("\"f\" must be a word string");
  m.f = m.rw.reduce(parse_word(m.rw, j["f"].get<std::string>()));

  if (!j["vol"].is_string())
    throw InputError("\"vol\" must be a rational string \"p/q\"");
  try {
    m.vol = parse_rational(j["vol"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("\"vol\": ") + e.what());
  }

  validate_model(m);
  return m;
}

void validate_model(const SpectralModel& model, int sample_length) {
  if (model.vol <= 0) throw InputError("model volume must be positive");
  if (sample_length < 1) throw InputError("sample length must be at least 1");

  // the displacement constant; this also requires cost entries for f itself
  const Rational C = model.quasi_constant();

  // the universe of words the checks run over: canonical samples for formula
  // models, the table's own keys otherwise
  std::vector<Word> universe;
  if (model.c_fn) {
    universe = enumerate_words(model.rw, sample_length);
  } else {
    for (const auto& entry : model.c_table)
      universe.push_back(model.rw.reduce(parse_word(model.rw, entry.first)));
  }

  auto lookup = [&model](const Word& w) -> std::pair<bool, Rational> {
    if (model.c_fn) return {true, model.c_fn(w)};
    std::string key = format_word(model.rw, model.rw.reduce(w));
    auto it = model.c_table.find(key);
    if (it == model.c_table.end()) return {false, Rational(0)};
    return {true, it->second};
  };
  auto norm_of = [&model](const Word& w) -> std::pair<bool, long long> {
    if (model.norm_fn) return {true, model.norm_fn(w)};
    std::string key = format_word(model.rw, model.rw.reduce(w));
    auto it = model.norm_table.find(key);
    if (it == model.norm_table.end()) return {false, 0};
    return {true, it->second};
  };
  auto show = [&model](const Word& w) { return format_word(model.rw, w); };

  // triangle inequality on every evaluable pair
  for (const Word& u : universe) {
    auto cu = lookup(u);
    if (!cu.first) continue;
    for (const Word& v : universe) {
      auto cv = lookup(v);
      if (!cv.first) continue;
      Word prod = model.rw.reduce(concat(u, v));
      auto cp = lookup(prod);
      if (!cp.first) continue;
      if (cp.second > cu.second + cv.second)
        throw InputError("cost violates the triangle inequality: c(\"" +
                         show(prod) + "\") = " + format_rational(cp.second) +
                         " exceeds c(\"" + show(u) + "\") + c(\"" + show(v) +
                         "\") = " + format_rational(cu.second + cv.second));
    }
  }

  // conjugation invariance, probed by generator conjugators
  for (const Word& u : universe) {
    auto cu = lookup(u);
    if (!cu.first) continue;
    for (int g = 1; g <= static_cast<int>(model.rw.generators.size()); ++g) {
      for (int l : {g, -g}) {
        Word conj = model.rw.reduce(concat(concat(Word{l}, u), Word{-l}));
        auto cc = lookup(conj);
        if (!cc.first) continue;
        if (cc.second != cu.second)
          throw InputError("cost violates conjugation invariance: c(\"" +
                           show(conj) + "\") = " + format_rational(cc.second) +
                           " differs from c(\"" + show(u) + "\") = " +
                           format_rational(cu.second));
      }
    }
  }

  // displacement bound and product sandwich for norm-one elements
  for (const Word& u : universe) {
    if (u.empty()) continue;
    auto nu = norm_of(u);
    if (!nu.first || nu.second != 1) continue;
    auto cu = lookup(u);
    auto ci = lookup(inverse_word(u));
    if (cu.first && ci.first) {
      Rational pair_sum = cu.second + ci.second;
      if (pair_sum < 0 || pair_sum > C)
        throw InputError("cost violates the displacement bound: c(\"" +
                         show(u) + "\") + c(\"" + show(inverse_word(u)) +
                         "\") = " + format_rational(pair_sum) +
                         " is outside [0, " + format_rational(C) + "]");
    }
    if (!cu.first) continue;
    for (const Word& v : universe) {
      auto cv = lookup(v);
      if (!cv.first) continue;
      Word prod = model.rw.reduce(concat(u, v));
      auto cp = lookup(prod);
      if (!cp.first) continue;
      if (cp.second < cu.second + cv.second - C)
        throw InputError("cost violates the product lower bound: c(\"" +
                         show(prod) + "\") = " + format_rational(cp.second) +
                         " is below c(\"" + show(u) + "\") + c(\"" + show(v) +
                         "\") - C = " +
                         format_rational(cu.second + cv.second - C));
    }
  }
}

FeketeResult fekete_limit(const std::vector<Rational>& a, int k_max) {
  if (k_max < 1) throw InputError("the Fekete horizon must be at least 1");
  if (static_cast<size_t>(k_max) > a.size())
    throw InputError("the sequence provides " + std::to_string(a.size()) +
                     " entries but the horizon asks for " +
                     std::to_string(k_max));

  auto check_pair = [&a](long long j, long long k) {
    const Rational& sum = a[static_cast<size_t>(j - 1)];
    if (a[static_cast<size_t>(j + k - 1)] >
        sum + a[static_cast<size_t>(k - 1)])
      throw InputError(
          "the sequence is not subadditive: a(" + std::to_string(j + k) +
          ") = " + format_rational(a[static_cast<size_t>(j + k - 1)]) +
          " exceeds a(" + std::to_string(j) + ") + a(" + std::to_string(k) +
          ") = " +
          format_rational(sum + a[static_cast<size_t>(k - 1)]));
  };

  if (k_max <= 96) {
    for (long long j = 1; j < k_max; ++j)
      for (long long k = j; j + k <= k_max; ++k) check_pair(j, k);
  } else {
    // spot checks: short prefixes against everything, doubling and
    // successor pairs, and a seeded sample of the rest
    for (long long j = 1; j <= 6; ++j)
      for (long long k = j; j + k <= k_max; ++k) check_pair(j, k);
    for (long long k = 1; 2 * k <= k_max; ++k) check_pair(k, k);
    for (long long k = 1; k + 1 <= k_max; ++k) check_pair(1, k);
    std::mt19937_64 rng(0xFEC57EULL ^ static_cast<unsigned long long>(k_max));
    for (int t = 0; t < 512; ++t) {
      long long j = 1 + static_cast<long long>(rng() % static_cast<unsigned long long>(k_max - 1));
      long long room = k_max - j;
      long long k = 1 + static_cast<long long>(rng() % static_cast<unsigned long long>(room));
      check_pair(std::min(j, k), std::max(j, k));
    }
  }

  FeketeResult out;
  out.k_used = k_max;
  out.estimate = a[0];
  out.arg_k = 1;
  for (long long k = 2; k <= k_max; ++k) {
    Rational ratio = a[static_cast<size_t>(k - 1)] / k;
    if (ratio < out.estimate) {
      out.estimate = ratio;
      out.arg_k = k;
    }
  }
  return out;
}

HomogenizationResult homogenize(const SpectralModel& model, const Word& phi,
                                int k_max) {
  if (k_max < 1) throw InputError("the homogenization horizon must be at least 1");
  Word base = model.rw.reduce(phi);
  HomogenizationResult out;
  out.k_used = k_max;
  if (base.empty()) {
    out.mu = 0;
    out.error_bound = 0;
    return out;
  }

  Word inv = inverse_word(base);
  std::vector<Rational> fwd, bwd;
  fwd.reserve(static_cast<size_t>(k_max));
  bwd.reserve(static_cast<size_t>(k_max));
  if (model.c_power_fn) {
    for (long long k = 1; k <= k_max; ++k) {
      fwd.push_back(model.c_power_fn(base, k));
      bwd.push_back(model.c_power_fn(inv, k));
    }
  } else {
    Word p, q;
    for (long long k = 1; k <= k_max; ++k) {
      p = model.rw.reduce(concat(p, base));
      q = model.rw.reduce(concat(q, inv));
      fwd.push_back(model.c(p));
      bwd.push_back(model.c(q));
    }
  }

  // c(phi^k) + c(phi^-k) >= c(1) >= 0 underwrites the lower end of the bracket
  for (long long k = 1; k <= k_max; ++k) {
    if (fwd[static_cast<size_t>(k - 1)] + bwd[static_cast<size_t>(k - 1)] < 0)
      throw InputError(
          "c(phi^k) + c(phi^-k) is negative at k = " + std::to_string(k) +
          " for phi = \"" + format_word(model.rw, base) +
          "\"; the model violates the displacement pairing");
  }

  FeketeResult up = fekete_limit(fwd, k_max);
  FeketeResult down = fekete_limit(bwd, k_max);

  // the limit slope lies in [-down.estimate, up.estimate]
  out.mu = model.vol * (down.estimate - up.estimate) / 2;
  out.error_bound = model.vol * (up.estimate + down.estimate) / 2;
  if (out.error_bound < 0)
    throw InputError(
        "the two Fekete brackets for \"" + format_word(model.rw, base) +
        "\" do not overlap; the cost data is not subadditive off the sampled "
        "pairs");
  return out;
}

CqaReport check_controlled_quasi_additivity(const SpectralModel& model,
                                            int max_word_length, int k_max) {
  if (max_word_length < 1)
    throw InputError("the word length bound must be at least 1");
  if (k_max < 1) throw InputError("the homogenization horizon must be at least 1");

  CqaReport report;
  report.max_word_length = max_word_length;
  report.k_max = k_max;
  report.max_gap = 0;

  const Rational C = model.quasi_constant();
  std::vector<Word> all = enumerate_words(model.rw, max_word_length);
  std::vector<Word> words;
  for (Word& w : all)
    if (!w.empty()) words.push_back(std::move(w));

  if (words.size() * words.size() > 250000)
    throw InputError("the check would examine " +
                     std::to_string(words.size() * words.size()) +
                     " word pairs; the cap is 250000");

  MuCache cache{model, k_max, {}};
  std::vector<long long> norms;
  norms.reserve(words.size());
  for (const Word& w : words) {
    long long n = model.norm(w);
    if (n < 1)
      throw InputError("fragmentation norm must be positive for \"" +
                       describe_word(model, w) + "\"");
    norms.push_back(n);
    cache.mu(w);
  }

  for (size_t i = 0; i < words.size(); ++i) {
    const HomogenizationResult& mu_u = cache.mu(words[i]);
    for (size_t j = 0; j < words.size(); ++j) {
      const HomogenizationResult& mu_v = cache.mu(words[j]);
      Word prod = model.rw.reduce(concat(words[i], words[j]));
      const HomogenizationResult& mu_p = cache.mu(prod);
      Rational gap = rational_abs(mu_p.mu - mu_u.mu - mu_v.mu);
      long long frag = std::min(2 * norms[i] - 1, 2 * norms[j] - 1);
      Rational bound = model.vol * 2 * C * frag;
      Rational allowed =
          bound + mu_p.error_bound + mu_u.error_bound + mu_v.error_bound;
      ++report.pairs_checked;
      if (gap > report.max_gap) report.max_gap = gap;
      if (bound > 0) {
        double ratio = to_double(gap / bound);
        if (ratio > report.max_ratio) report.max_ratio = ratio;
      }
      if (gap > allowed && report.violations.size() < 50) {
        report.violations.push_back({describe_word(model, words[i]),
                                     describe_word(model, words[j]), gap,
                                     allowed});
      }
    }
  }

  // spot checks of the finite-level inequalities the bound rests on:
  // |c(f_1 .. f_m psi) - sum c(f_i) - c(psi)| <= m C for norm-one f_i, and
  // the power form |c((f_1 .. f_m)^l) - l sum c(f_i)| <= l m C
  std::vector<Word> pool;
  for (size_t i = 0; i < words.size(); ++i)
    if (norms[i] == 1) pool.push_back(words[i]);
  if (!pool.empty()) {
    std::mt19937_64 rng(0xA11CEULL);
    auto pick = [&rng](const std::vector<Word>& from) {
      return from[static_cast<size_t>(rng() % from.size())];
    };
    for (int t = 0; t < 48; ++t) {
      int m = 1 + static_cast<int>(rng() % 3);
      Word prod;
      Rational sum = 0;
      std::string shown;
      for (int i = 0; i < m; ++i) {
        Word f = pick(pool);
        prod = concat(prod, f);
        sum += model.c(f);
        shown += (i ? " " : "") + describe_word(model, f);
      }
      Word psi = pick(words);
      Rational lhs =
          rational_abs(model.c(concat(prod, psi)) - sum - model.c(psi));
      ++report.aa_product_samples;
      if (lhs > m * C)
        report.aa_violations.push_back(
            "product inequality fails for fragments [" + shown +
            "] against \"" + describe_word(model, psi) + "\": defect " +
            format_rational(lhs) + " exceeds " + format_rational(m * C));
    }
    for (int t = 0; t < 32; ++t) {
      int m = 1 + static_cast<int>(rng() % 3);
      long long l = 1 + static_cast<long long>(rng() % 4);
      Word prod;
      Rational sum = 0;
      std::string shown;
      for (int i = 0; i < m; ++i) {
        Word f = pick(pool);
        prod = concat(prod, f);
        sum += model.c(f);
        shown += (i ? " " : "") + describe_word(model, f);
      }
      Word pow;
      for (long long i = 0; i < l; ++i) pow = concat(pow, prod);
      Rational lhs = rational_abs(model.c(pow) - l * sum);
      ++report.aa_power_samples;
      if (lhs > l * m * C)
        report.aa_violations.push_back(
            "power inequality fails for fragments [" + shown + "] at l = " +
            std::to_string(l) + ": defect " + format_rational(lhs) +
            " exceeds " + format_rational(l * m * C));
    }
  }

  return report;
}

AbelianReport check_abelian_restriction(const SpectralModel& model,
                                        const std::vector<std::string>& subset,
                                        int max_word_length, int k_max) {
  if (subset.empty())
    throw InputError("the subset must name at least one generator");
  if (max_word_length < 1)
    throw InputError("the word length bound must be at least 1");
  if (k_max < 1) throw InputError("the homogenization horizon must be at least 1");

  std::vector<int> letters;
  for (const std::string& name : subset) {
    int idx = -1;
    for (size_t i = 0; i < model.rw.generators.size(); ++i)
      if (model.rw.generators[i] == name) idx = static_cast<int>(i);
    if (idx < 0)
      throw InputError("unknown generator \"" + name + "\" in the subset");
    letters.push_back(idx + 1);
  }

  AbelianReport report;
  report.max_gap = 0;
  report.max_tolerance = 0;

  // the generators must commute pairwise under rewriting
  for (size_t i = 0; i < letters.size(); ++i) {
    for (size_t j = i + 1; j < letters.size(); ++j) {
      Word gh = model.rw.reduce(Word{letters[i], letters[j]});
      Word hg = model.rw.reduce(Word{letters[j], letters[i]});
      if (gh != hg) {
        report.commuting = false;
        report.witness_u = describe_word(model, gh);
        report.witness_v = describe_word(model, hg);
        return report;
      }
    }
  }

  // enumerate the subgroup ball
  std::set<Word, ShortlexLess> seen;
  Word cur;
  std::function<void()> visit = [&]() {
    seen.insert(model.rw.reduce(cur));
    if (static_cast<int>(cur.size()) == max_word_length) return;
    for (int g : letters) {
      for (int l : {g, -g}) {
        if (!cur.empty() && cur.back() == -l) continue;
        cur.push_back(l);
        visit();
        cur.pop_back();
      }
    }
  };
  double raw = 1.0, layer = 1.0;
  for (int k = 1; k <= max_word_length; ++k) {
    layer *= (k == 1 ? 2.0 * letters.size() : 2.0 * letters.size() - 1.0);
    raw += layer;
    if (raw > 2.0e6)
      throw InputError("subgroup enumeration up to length " +
                       std::to_string(max_word_length) + " is too large");
  }
  visit();

  std::vector<Word> words;
  for (const Word& w : seen)
    if (!w.empty()) words.push_back(w);
  if (words.size() * words.size() > 250000)
    throw InputError("the check would examine " +
                     std::to_string(words.size() * words.size()) +
                     " word pairs; the cap is 250000");

  MuCache cache{model, k_max, {}};
  for (size_t i = 0; i < words.size(); ++i) {
    const HomogenizationResult& mu_u = cache.mu(words[i]);
    for (size_t j = 0; j < words.size(); ++j) {
      const HomogenizationResult& mu_v = cache.mu(words[j]);
      Word prod = model.rw.reduce(concat(words[i], words[j]));
      const HomogenizationResult& mu_p = cache.mu(prod);
      Rational gap = rational_abs(mu_p.mu - mu_u.mu - mu_v.mu);
      Rational tol =
          mu_p.error_bound + mu_u.error_bound + mu_v.error_bound;
      ++report.pairs_checked;
      if (gap > report.max_gap) report.max_gap = gap;
      if (tol > report.max_tolerance) report.max_tolerance = tol;
      if (gap > tol && report.violations.size() < 50) {
        report.violations.push_back(
            "mu(\"" + describe_word(model, prod) + "\") - mu(\"" +
            describe_word(model, words[i]) + "\") - mu(\"" +
            describe_word(model, words[j]) + "\") has defect " +
            format_rational(gap) + " beyond the error allowance " +
            format_rational(tol));
      }
    }
  }
  return report;
}

}  // namespace qs
