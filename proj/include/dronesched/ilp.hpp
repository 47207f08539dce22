#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "dronesched/errors.hpp"
#include "dronesched/instance.hpp"
#include "dronesched/schedule.hpp"

namespace dronesched {

using Rational = boost::rational<long long>;

// "p/q", plain decimals, and scientific notation, parsed exactly.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw ParseError("empty rational");
  const auto slash = text.find('/');
  auto to_ll = [](const std::string& s) {
    if (s.empty()) throw ParseError("malformed rational");
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw ParseError("malformed rational '" + s + "'");
    }
    if (pos != s.size()) throw ParseError("malformed rational '" + s + "'");
    return v;
  };
  if (slash != std::string::npos) {
    const long long num = to_ll(text.substr(0, slash));
    const long long den = to_ll(text.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator");
    return Rational(num, den);
  }

  std::string s = text;
  bool negative = false;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    s.erase(0, 1);
  }
  int exponent = 0;
  if (const auto e = s.find_first_of("eE"); e != std::string::npos) {
    exponent = static_cast<int>(to_ll(s.substr(e + 1)));
    s.erase(e);
  }
  std::string digits = s;
  if (const auto dot = s.find('.'); dot != std::string::npos) {
    digits = s.substr(0, dot) + s.substr(dot + 1);
    exponent -= static_cast<int>(s.size() - dot - 1);
  }
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError("malformed rational '" + text + "'");
  }
  if (digits.size() > 18) throw ParseError("rational literal too long");
  long long mantissa = digits.empty() ? 0 : std::stoll(digits);
  if (exponent < -18 || exponent > 18) {
    throw ParseError("rational exponent out of range");
  }
  long long pow10 = 1;
  for (int i = 0; i < std::abs(exponent); ++i) {
    if (pow10 > 922337203685477580LL / 10) {
      throw ParseError("rational exponent out of range");
    }
    pow10 *= 10;
  }
  Rational r = exponent >= 0 ? Rational(mantissa * pow10, 1)
                             : Rational(mantissa, pow10);
  return negative ? -r : r;
}

// Exact decimal expansion; throws if the expansion does not terminate.
inline std::string rational_to_decimal(const Rational& r) {
  long long num = r.numerator();
  long long den = r.denominator();
  std::string out;
  if (num < 0) {
    out += '-';
    num = -num;
  }
  out += std::to_string(num / den);
  long long rem = num % den;
  if (rem == 0) return out;
  out += '.';
  for (int i = 0; i < 64 && rem != 0; ++i) {
    rem *= 10;
    out += static_cast<char>('0' + rem / den);
    rem %= den;
  }
  if (rem != 0) {
    throw ModelError("coefficient has no terminating decimal expansion");
  }
  return out;
}

enum class LpMode { kRepaired, kLiteral };
enum class Relation { kLe, kEq, kGe };

struct LinearTerm {
  int var = 0;
  long long coeff = 0;
  bool operator==(const LinearTerm&) const = default;
};

struct LpRow {
  std::string name;
  std::vector<LinearTerm> terms;
  Relation rel = Relation::kLe;
  long long rhs = 0;
  bool operator==(const LpRow&) const = default;
};

struct ObjectiveTerm {
  int var = 0;
  Rational coeff;
  bool operator==(const ObjectiveTerm&) const = default;
};

// Index arithmetic for the variable blocks. k/st grids cover all ordered node
// pairs including self pairs (those are pinned to zero by rows); the
// absolute-difference auxiliaries exist only for proper edges. Difference
// index j means x[j] - x[j-1] with x treated as 0 at the virtual times -1 and
// horizon, so j ranges over 0..horizon for k/st and 1..horizon-1 for ep.
struct VarLayout {
  int nodes = 0;
  int horizon = 0;
  int agents = 0;
  long long base_fd = 0, base_ep = 0, base_k = 0, base_st = 0;
  long long base_absk = 0, base_absst = 0, base_absep = 0;
  long long total = 0;

  static VarLayout build(int nodes, int horizon, int agents) {
    VarLayout l;
    l.nodes = nodes;
    l.horizon = horizon;
    l.agents = agents;
    const long long n = nodes, h = horizon, a = agents;
    const long long off = n * (n - 1);
    l.base_fd = 0;
    l.base_ep = l.base_fd + n * h;
    l.base_k = l.base_ep + n * a * h;
    l.base_st = l.base_k + n * n * a * h;
    l.base_absk = l.base_st + n * n * a * h;
    l.base_absst = l.base_absk + 2 * off * a * (h + 1);
    l.base_absep = l.base_absst + 2 * off * a * (h + 1);
    l.total = l.base_absep + 2 * n * a * (h - 1);
    return l;
  }

  int pair_rank(int n, int np) const { return n * (nodes - 1) + (np < n ? np : np - 1); }

  int fd(int n, int t) const { return static_cast<int>(base_fd + static_cast<long long>(n) * horizon + t); }
  int ep(int n, int a, int t) const {
    return static_cast<int>(base_ep + (static_cast<long long>(n) * agents + a) * horizon + t);
  }
  int k(int n, int np, int a, int t) const {
    return static_cast<int>(base_k + ((static_cast<long long>(n) * nodes + np) * agents + a) * horizon + t);
  }
  int st(int n, int np, int a, int t) const {
    return static_cast<int>(base_st + ((static_cast<long long>(n) * nodes + np) * agents + a) * horizon + t);
  }
  int absk(int n, int np, int a, int j, bool q) const {
    return static_cast<int>(base_absk +
                            2 * ((static_cast<long long>(pair_rank(n, np)) * agents + a) * (horizon + 1) + j) +
                            (q ? 1 : 0));
  }
  int absst(int n, int np, int a, int j, bool q) const {
    return static_cast<int>(base_absst +
                            2 * ((static_cast<long long>(pair_rank(n, np)) * agents + a) * (horizon + 1) + j) +
                            (q ? 1 : 0));
  }
  int absep(int n, int a, int j, bool q) const {
    return static_cast<int>(base_absep +
                            2 * ((static_cast<long long>(n) * agents + a) * (horizon - 1) + (j - 1)) +
                            (q ? 1 : 0));
  }
};

// Binary-variable model of the scheduling problem: coverage objective with a
// small movement penalty mu, con1..con14 row families plus self-pin and
// absolute-value linearization rows. Repaired mode uses the schedule
// semantics (arrival at departure + cost + 1, pinning at horizon-1); literal
// mode keeps the con-family index ranges of the original formulation for
// side-by-side comparison and is archival only.
struct LpModel {
  LpMode mode = LpMode::kRepaired;
  Rational mu;
  VarLayout layout;
  std::vector<std::string> variables;
  std::vector<LpRow> rows;
  std::vector<ObjectiveTerm> objective;  // maximized

  int index_of(const std::string& name) const {
    if (name_index_.empty() && !variables.empty()) {
      name_index_.reserve(variables.size());
      for (std::size_t i = 0; i < variables.size(); ++i) {
        name_index_.emplace(variables[i], static_cast<int>(i));
      }
    }
    const auto it = name_index_.find(name);
    return it == name_index_.end() ? -1 : it->second;
  }

 private:
  mutable std::unordered_map<std::string, int> name_index_;
};

// A 0/1 valuation of every model variable, aligned with LpModel::variables.
struct Assignment {
  std::vector<std::uint8_t> value;
};

struct EvaluationResult {
  bool feasible = true;
  std::vector<std::string> violations;  // row names, in row order
  Rational objective;
};

namespace detail {

inline std::string idx_name(const char* stem, std::initializer_list<int> idx,
                            const char* suffix = nullptr) {
  std::string s = stem;
  for (int v : idx) {
    s += '_';
    s += std::to_string(v);
  }
  if (suffix) {
    s += '_';
    s += suffix;
  }
  return s;
}

}  // namespace detail

inline LpModel build_ilp(const Instance& inst, const Rational& mu,
                         LpMode mode, long long max_variables = 5'000'000) {
  const int N = inst.num_nodes();
  const int H = inst.horizon;
  const int A = inst.num_agents();

  if (mu <= Rational(0)) throw ModelError("mu must be positive");
  if (mode == LpMode::kRepaired && A > 0 &&
      mu * Rational(static_cast<long long>(A) * (H - 1)) >= Rational(1)) {
    throw ModelError("mu must be below 1/(agents*(horizon-1)) so the movement "
                     "penalty can never outweigh one unit of coverage");
  }

  LpModel model;
  model.mode = mode;
  model.mu = mu;
  model.layout = VarLayout::build(N, H, A);
  if (model.layout.total > max_variables) {
    throw ModelError("model would need " + std::to_string(model.layout.total) +
                     " variables, above the guard of " +
                     std::to_string(max_variables));
  }

  const VarLayout& L = model.layout;
  model.variables.resize(static_cast<std::size_t>(L.total));
  for (int n = 0; n < N; ++n) {
    for (int t = 0; t < H; ++t) {
      model.variables[L.fd(n, t)] = detail::idx_name("fd", {n, t});
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int a = 0; a < A; ++a) {
      for (int t = 0; t < H; ++t) {
        model.variables[L.ep(n, a, t)] = detail::idx_name("ep", {n, a, t});
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int np = 0; np < N; ++np) {
      for (int a = 0; a < A; ++a) {
        for (int t = 0; t < H; ++t) {
          model.variables[L.k(n, np, a, t)] = detail::idx_name("k", {n, np, a, t});
          model.variables[L.st(n, np, a, t)] = detail::idx_name("st", {n, np, a, t});
        }
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int np = 0; np < N; ++np) {
      if (np == n) continue;
      for (int a = 0; a < A; ++a) {
        for (int j = 0; j <= H; ++j) {
          model.variables[L.absk(n, np, a, j, false)] = detail::idx_name("absk", {n, np, a, j}, "p");
          model.variables[L.absk(n, np, a, j, true)] = detail::idx_name("absk", {n, np, a, j}, "q");
          model.variables[L.absst(n, np, a, j, false)] = detail::idx_name("absst", {n, np, a, j}, "p");
          model.variables[L.absst(n, np, a, j, true)] = detail::idx_name("absst", {n, np, a, j}, "q");
        }
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int a = 0; a < A; ++a) {
      for (int j = 1; j < H; ++j) {
        model.variables[L.absep(n, a, j, false)] = detail::idx_name("absep", {n, a, j}, "p");
        model.variables[L.absep(n, a, j, true)] = detail::idx_name("absep", {n, a, j}, "q");
      }
    }
  }

  // Objective: covered demand minus mu times the transit toggle count
  // (consecutive differences only; both ends hover, so each trip counts 2).
  for (int n = 0; n < N; ++n) {
    for (int t = 0; t < H; ++t) {
      if (inst.demand.at(n, t)) model.objective.push_back({L.fd(n, t), Rational(1)});
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int np = 0; np < N; ++np) {
      if (np == n) continue;
      for (int a = 0; a < A; ++a) {
        for (int j = 1; j < H; ++j) {
          model.objective.push_back({L.absk(n, np, a, j, false), -mu});
          model.objective.push_back({L.absk(n, np, a, j, true), -mu});
        }
      }
    }
  }

  auto add_row = [&](std::string name, std::vector<LinearTerm> terms,
                     Relation rel, long long rhs) {
    model.rows.push_back({std::move(name), std::move(terms), rel, rhs});
  };

  const bool literal = mode == LpMode::kLiteral;

  // con1/con2: boundary pinning.
  for (int a = 0; a < A; ++a) {
    add_row("con1_a" + std::to_string(a),
            {{L.ep(inst.agents[a].init_node, a, 0), 1}}, Relation::kEq, 1);
  }
  for (int a = 0; a < A; ++a) {
    add_row("con2_a" + std::to_string(a),
            {{L.ep(inst.agents[a].fin_node, a, H - 1), 1}}, Relation::kEq, 1);
  }
  // con3: at most one hover location per agent and step.
  for (int a = 0; a < A; ++a) {
    for (int t = 0; t < H; ++t) {
      std::vector<LinearTerm> terms;
      for (int n = 0; n < N; ++n) terms.push_back({L.ep(n, a, t), 1});
      add_row("con3_a" + std::to_string(a) + "_t" + std::to_string(t),
              std::move(terms), Relation::kLe, 1);
    }
  }
  // con4: at most one edge in transit per agent and step.
  for (int a = 0; a < A; ++a) {
    for (int t = 0; t < H; ++t) {
      std::vector<LinearTerm> terms;
      for (int n = 0; n < N; ++n) {
        for (int np = 0; np < N; ++np) {
          if (np != n) terms.push_back({L.k(n, np, a, t), 1});
        }
      }
      add_row("con4_a" + std::to_string(a) + "_t" + std::to_string(t),
              std::move(terms), Relation::kLe, 1);
    }
  }
  // con5: hover or transit, exactly one per step.
  for (int a = 0; a < A; ++a) {
    for (int t = 0; t < H; ++t) {
      std::vector<LinearTerm> terms;
      for (int n = 0; n < N; ++n) {
        for (int np = 0; np < N; ++np) {
          if (np != n) terms.push_back({L.k(n, np, a, t), 1});
        }
      }
      for (int n = 0; n < N; ++n) terms.push_back({L.ep(n, a, t), 1});
      add_row("con5_a" + std::to_string(a) + "_t" + std::to_string(t),
              std::move(terms), Relation::kEq, 1);
    }
  }
  // con6: coverage requires presence.
  for (int n = 0; n < N; ++n) {
    for (int t = 0; t < H; ++t) {
      std::vector<LinearTerm> terms{{L.fd(n, t), 1}};
      for (int a = 0; a < A; ++a) terms.push_back({L.ep(n, a, t), -1});
      add_row("con6_n" + std::to_string(n) + "_t" + std::to_string(t),
              std::move(terms), Relation::kLe, 0);
    }
  }
  // con7: at most one trip start per agent and step.
  for (int a = 0; a < A; ++a) {
    for (int t = 0; t < H; ++t) {
      std::vector<LinearTerm> terms;
      for (int n = 0; n < N; ++n) {
        for (int np = 0; np < N; ++np) {
          if (np != n) terms.push_back({L.st(n, np, a, t), 1});
        }
      }
      add_row("con7_a" + std::to_string(a) + "_t" + std::to_string(t),
              std::move(terms), Relation::kLe, 1);
    }
  }
  // con8: total transit steps equal summed trip durations.
  for (int a = 0; a < A; ++a) {
    std::vector<LinearTerm> terms;
    for (int n = 0; n < N; ++n) {
      for (int np = 0; np < N; ++np) {
        if (np == n) continue;
        for (int t = 0; t < H; ++t) terms.push_back({L.k(n, np, a, t), 1});
      }
    }
    for (int n = 0; n < N; ++n) {
      for (int np = 0; np < N; ++np) {
        if (np == n) continue;
        for (int t = 0; t < H; ++t) {
          terms.push_back({L.st(n, np, a, t), -inst.travel(n, np)});
        }
      }
    }
    add_row("con8_a" + std::to_string(a), std::move(terms), Relation::kEq, 0);
  }
  // con9: departure from n implies transit out of n (repaired: at t+1).
  for (int n = 0; n < N; ++n) {
    for (int a = 0; a < A; ++a) {
      for (int t = 0; t < H - 1; ++t) {
        std::vector<LinearTerm> terms{{L.ep(n, a, t), 1}, {L.ep(n, a, t + 1), -1}};
        const int kt = literal ? t : t + 1;
        for (int np = 0; np < N; ++np) {
          if (np != n) terms.push_back({L.k(n, np, a, kt), -1});
        }
        add_row("con9_n" + std::to_string(n) + "_a" + std::to_string(a) +
                    "_t" + std::to_string(t),
                std::move(terms), Relation::kLe, 0);
      }
    }
  }
  // con10: arrival at n implies transit into n (repaired: at t-1, edges
  // oriented toward n; literal keeps the origin-indexed sum at time t).
  for (int n = 0; n < N; ++n) {
    for (int a = 0; a < A; ++a) {
      for (int t = 1; t < H; ++t) {
        std::vector<LinearTerm> terms{{L.ep(n, a, t), 1}, {L.ep(n, a, t - 1), -1}};
        for (int np = 0; np < N; ++np) {
          if (np == n) continue;
          terms.push_back(literal ? LinearTerm{L.k(n, np, a, t), -1}
                                  : LinearTerm{L.k(np, n, a, t - 1), -1});
        }
        add_row("con10_n" + std::to_string(n) + "_a" + std::to_string(a) +
                    "_t" + std::to_string(t),
                std::move(terms), Relation::kLe, 0);
      }
    }
  }
  // con11: departure from n implies a trip start at t.
  for (int n = 0; n < N; ++n) {
    for (int a = 0; a < A; ++a) {
      for (int t = 0; t < H - 1; ++t) {
        std::vector<LinearTerm> terms{{L.ep(n, a, t), 1}, {L.ep(n, a, t + 1), -1}};
        for (int np = 0; np < N; ++np) {
          if (np != n) terms.push_back({L.st(n, np, a, t), -1});
        }
        add_row("con11_n" + std::to_string(n) + "_a" + std::to_string(a) +
                    "_t" + std::to_string(t),
                std::move(terms), Relation::kLe, 0);
      }
    }
  }
  // con12: per edge and agent, start toggles equal transit toggles. Repaired
  // mode includes the virtual boundary differences; literal mode keeps the
  // consecutive-only range, which a trip departing at t=0 violates.
  {
    const int j_lo = literal ? 1 : 0;
    const int j_hi = literal ? H - 1 : H;
    for (int n = 0; n < N; ++n) {
      for (int np = 0; np < N; ++np) {
        if (np == n) continue;
        for (int a = 0; a < A; ++a) {
          std::vector<LinearTerm> terms;
          for (int j = j_lo; j <= j_hi; ++j) {
            terms.push_back({L.absst(n, np, a, j, false), 1});
            terms.push_back({L.absst(n, np, a, j, true), 1});
          }
          for (int j = j_lo; j <= j_hi; ++j) {
            terms.push_back({L.absk(n, np, a, j, false), -1});
            terms.push_back({L.absk(n, np, a, j, true), -1});
          }
          add_row("con12_n" + std::to_string(n) + "_np" + std::to_string(np) +
                      "_a" + std::to_string(a),
                  std::move(terms), Relation::kEq, 0);
        }
      }
    }
  }
  // con13: hover-run boundaries match trip starts globally. Hover toggles are
  // counted over consecutive steps only (2 per trip); start toggles need the
  // virtual boundary so a trip departing at t=0 still counts 2.
  {
    std::vector<LinearTerm> terms;
    for (int n = 0; n < N; ++n) {
      for (int a = 0; a < A; ++a) {
        for (int j = 1; j < H; ++j) {
          terms.push_back({L.absep(n, a, j, false), 1});
          terms.push_back({L.absep(n, a, j, true), 1});
        }
      }
    }
    const int j_lo = literal ? 1 : 0;
    const int j_hi = literal ? H - 1 : H;
    for (int n = 0; n < N; ++n) {
      for (int np = 0; np < N; ++np) {
        if (np == n) continue;
        for (int a = 0; a < A; ++a) {
          for (int j = j_lo; j <= j_hi; ++j) {
            terms.push_back({L.absst(n, np, a, j, false), -1});
            terms.push_back({L.absst(n, np, a, j, true), -1});
          }
        }
      }
    }
    if (A > 0) add_row("con13", std::move(terms), Relation::kEq, 0);
  }
  // con14: a started trip occupies its edge for the full duration. Repaired
  // mode covers t+1..t+cost (clipped windows force st to 0); literal mode
  // keeps the t..t+cost+1 window with its t+cost+1 < horizon-1 guard.
  for (int n = 0; n < N; ++n) {
    for (int np = 0; np < N; ++np) {
      if (np == n) continue;
      const int cost = inst.travel(n, np);
      for (int a = 0; a < A; ++a) {
        for (int t = 0; t < H; ++t) {
          std::vector<LinearTerm> terms;
          if (literal) {
            if (t + cost + 1 < H - 1) {
              for (int tp = t; tp <= t + cost + 1; ++tp) {
                terms.push_back({L.k(n, np, a, tp), 1});
              }
            }
          } else {
            const int hi = std::min(t + cost, H - 1);
            for (int tp = t + 1; tp <= hi; ++tp) {
              terms.push_back({L.k(n, np, a, tp), 1});
            }
          }
          terms.push_back({L.st(n, np, a, t), -cost});
          add_row("con14_n" + std::to_string(n) + "_np" + std::to_string(np) +
                      "_a" + std::to_string(a) + "_t" + std::to_string(t),
                  std::move(terms), Relation::kGe, 0);
        }
      }
    }
  }
  // Self pairs exist in the variable grid but are never meaningful.
  for (int a = 0; a < A; ++a) {
    for (int t = 0; t < H; ++t) {
      std::vector<LinearTerm> terms;
      for (int n = 0; n < N; ++n) {
        terms.push_back({L.k(n, n, a, t), 1});
        terms.push_back({L.st(n, n, a, t), 1});
      }
      add_row("selfzero_a" + std::to_string(a) + "_t" + std::to_string(t),
              std::move(terms), Relation::kEq, 0);
    }
  }
  // Absolute-difference linearization: p - q equals the step difference and
  // p + q <= 1, which makes p + q the exact absolute value for 0/1 series.
  for (int n = 0; n < N; ++n) {
    for (int np = 0; np < N; ++np) {
      if (np == n) continue;
      for (int a = 0; a < A; ++a) {
        for (int j = 0; j <= H; ++j) {
          std::vector<LinearTerm> terms{{L.absk(n, np, a, j, false), 1},
                                        {L.absk(n, np, a, j, true), -1}};
          if (j <= H - 1) terms.push_back({L.k(n, np, a, j), -1});
          if (j >= 1) terms.push_back({L.k(n, np, a, j - 1), 1});
          add_row("absdef_k_" + std::to_string(n) + "_" + std::to_string(np) +
                      "_" + std::to_string(a) + "_" + std::to_string(j),
                  std::move(terms), Relation::kEq, 0);
        }
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int np = 0; np < N; ++np) {
      if (np == n) continue;
      for (int a = 0; a < A; ++a) {
        for (int j = 0; j <= H; ++j) {
          std::vector<LinearTerm> terms{{L.absst(n, np, a, j, false), 1},
                                        {L.absst(n, np, a, j, true), -1}};
          if (j <= H - 1) terms.push_back({L.st(n, np, a, j), -1});
          if (j >= 1) terms.push_back({L.st(n, np, a, j - 1), 1});
          add_row("absdef_st_" + std::to_string(n) + "_" + std::to_string(np) +
                      "_" + std::to_string(a) + "_" + std::to_string(j),
                  std::move(terms), Relation::kEq, 0);
        }
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int a = 0; a < A; ++a) {
      for (int j = 1; j < H; ++j) {
        std::vector<LinearTerm> terms{{L.absep(n, a, j, false), 1},
                                      {L.absep(n, a, j, true), -1},
                                      {L.ep(n, a, j), -1},
                                      {L.ep(n, a, j - 1), 1}};
        add_row("absdef_ep_" + std::to_string(n) + "_" + std::to_string(a) +
                    "_" + std::to_string(j),
                std::move(terms), Relation::kEq, 0);
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int np = 0; np < N; ++np) {
      if (np == n) continue;
      for (int a = 0; a < A; ++a) {
        for (int j = 0; j <= H; ++j) {
          add_row("abscap_k_" + std::to_string(n) + "_" + std::to_string(np) +
                      "_" + std::to_string(a) + "_" + std::to_string(j),
                  {{L.absk(n, np, a, j, false), 1}, {L.absk(n, np, a, j, true), 1}},
                  Relation::kLe, 1);
        }
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int np = 0; np < N; ++np) {
      if (np == n) continue;
      for (int a = 0; a < A; ++a) {
        for (int j = 0; j <= H; ++j) {
          add_row("abscap_st_" + std::to_string(n) + "_" + std::to_string(np) +
                      "_" + std::to_string(a) + "_" + std::to_string(j),
                  {{L.absst(n, np, a, j, false), 1}, {L.absst(n, np, a, j, true), 1}},
                  Relation::kLe, 1);
        }
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int a = 0; a < A; ++a) {
      for (int j = 1; j < H; ++j) {
        add_row("abscap_ep_" + std::to_string(n) + "_" + std::to_string(a) +
                    "_" + std::to_string(j),
                {{L.absep(n, a, j, false), 1}, {L.absep(n, a, j, true), 1}},
                Relation::kLe, 1);
      }
    }
  }

  return model;
}

namespace detail {

inline void append_term(std::string& out, std::size_t& line_len, bool first,
                        const std::string& coeff_text, bool negative,
                        const std::string& name) {
  std::string piece;
  if (first) {
    if (negative) piece += "- ";
  } else {
    piece += negative ? " - " : " + ";
  }
  if (!coeff_text.empty()) {
    piece += coeff_text;
    piece += ' ';
  }
  piece += name;
  if (line_len + piece.size() > 72) {
    out += "\n ";
    line_len = 1;
    if (!first && piece.front() == ' ') piece.erase(0, 1);
  }
  out += piece;
  line_len += piece.size();
}

}  // namespace detail

// CPLEX LP text: Maximize / Subject To / Binary / End sections, byte-stable
// for a given model.
inline std::string write_lp(const LpModel& model) {
  std::string out;
  out += "\\ dronesched lp mode=";
  out += model.mode == LpMode::kRepaired ? "repaired" : "literal";
  out += " mu=";
  out += std::to_string(model.mu.numerator()) + "/" +
         std::to_string(model.mu.denominator());
  out += "\nMaximize\n obj:";
  std::size_t line_len = 5;
  bool first = true;
  for (const ObjectiveTerm& term : model.objective) {
    const Rational c = term.coeff;
    const Rational mag = c < Rational(0) ? -c : c;
    const std::string coeff_text =
        mag == Rational(1) ? std::string() : rational_to_decimal(mag);
    if (first) out += ' ', ++line_len;
    detail::append_term(out, line_len, first, coeff_text, c < Rational(0),
                        model.variables[term.var]);
    first = false;
  }
  if (first) out += " 0";
  out += "\nSubject To\n";
  for (const LpRow& row : model.rows) {
    out += ' ';
    out += row.name;
    out += ':';
    line_len = row.name.size() + 2;
    bool row_first = true;
    for (const LinearTerm& term : row.terms) {
      const long long mag = term.coeff < 0 ? -term.coeff : term.coeff;
      const std::string coeff_text = mag == 1 ? std::string() : std::to_string(mag);
      if (row_first) out += ' ', ++line_len;
      detail::append_term(out, line_len, row_first, coeff_text, term.coeff < 0,
                          model.variables[term.var]);
      row_first = false;
    }
    if (row_first) out += " 0";
    switch (row.rel) {
      case Relation::kLe: out += " <= "; break;
      case Relation::kEq: out += " = "; break;
      case Relation::kGe: out += " >= "; break;
    }
    out += std::to_string(row.rhs);
    out += '\n';
  }
  out += "Binary\n";
  for (const std::string& name : model.variables) {
    out += ' ';
    out += name;
    out += '\n';
  }
  out += "End\n";
  return out;
}

// Sidecar text mapping every row name to its constraint family, with a short
// description per family.
inline std::string write_lp_mapping(const LpModel& model) {
  std::string out;
  out += "# dronesched LP row map (row name -> constraint family)\n";
  out += "# mode=";
  out += model.mode == LpMode::kRepaired ? "repaired" : "literal";
  out += "\n";
  out +=
      "# con1: agent pinned to its initial node at the first step\n"
      "# con2: agent pinned to its final node at the last step\n"
      "# con3: at most one hover location per agent and step\n"
      "# con4: at most one edge in transit per agent and step\n"
      "# con5: each agent either hovers or is in transit, exactly one, per step\n"
      "# con6: a cell counts as covered only if some agent hovers there\n"
      "# con7: at most one trip start per agent and step\n"
      "# con8: per agent, total transit steps equal summed trip durations\n"
      "# con9: leaving a node implies being in transit out of it\n"
      "# con10: arriving at a node implies having been in transit into it\n"
      "# con11: leaving a node implies a recorded trip start\n"
      "# con12: per edge and agent, trip-start toggles match transit toggles\n"
      "# con13: hover-run boundaries match trip starts globally\n"
      "# con14: a started trip occupies its edge for its full travel duration\n"
      "# selfzero: self-pair transit/start variables fixed to zero\n"
      "# absdef: ties each absolute-difference pair (p,q) to its series step\n"
      "# abscap: at most one of (p,q) may be set\n"
      "# repaired mode uses arrival at departure + cost + 1 and pins the last\n"
      "# step; literal mode keeps the con-family index ranges of the original\n"
      "# formulation (archival; valid schedules may violate con12/con13/con14\n"
      "# there).\n";
  for (const LpRow& row : model.rows) {
    std::string family = row.name.substr(0, row.name.find('_'));
    out += row.name;
    out += '\t';
    out += family;
    out += '\n';
  }
  return out;
}

// Reads the subset of CPLEX LP text produced by write_lp.
inline LpModel read_lp(const std::string& text) {
  LpModel model;

  // Comment lines open with a backslash; the writer stores mode and mu there.
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '\\') {
      const std::size_t eol = text.find('\n', i);
      const std::string comment =
          text.substr(i, eol == std::string::npos ? std::string::npos : eol - i);
      if (const auto p = comment.find("mode=literal"); p != std::string::npos) {
        model.mode = LpMode::kLiteral;
      }
      if (const auto p = comment.find("mu="); p != std::string::npos) {
        const std::size_t end = comment.find(' ', p);
        model.mu = parse_rational(comment.substr(
            p + 3, end == std::string::npos ? std::string::npos : end - p - 3));
      }
      if (eol == std::string::npos) break;
      i = eol + 1;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) {
      ++j;
    }
    tokens.push_back(text.substr(i, j - i));
    i = j;
  }

  struct RawTerm {
    Rational coeff;
    std::string name;
  };
  struct RawRow {
    std::string name;
    std::vector<RawTerm> terms;
    Relation rel = Relation::kLe;
    long long rhs = 0;
  };
  std::vector<RawTerm> objective;
  std::vector<RawRow> rows;

  std::size_t pos = 0;
  auto expect = [&](const std::string& word) {
    if (pos >= tokens.size() || tokens[pos] != word) {
      throw ParseError("LP text: expected '" + word + "'");
    }
    ++pos;
  };
  auto is_number = [](const std::string& s) {
    return !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.');
  };
  auto at_relation = [&]() {
    return pos < tokens.size() &&
           (tokens[pos] == "<=" || tokens[pos] == "=" || tokens[pos] == ">=");
  };
  // Reads a sign/coefficient/name term sequence until `stop` says to halt.
  auto read_terms = [&](std::vector<RawTerm>& out, auto stop) {
    while (pos < tokens.size() && !stop()) {
      Rational sign(1);
      if (tokens[pos] == "+") {
        ++pos;
      } else if (tokens[pos] == "-") {
        sign = Rational(-1);
        ++pos;
      }
      if (pos >= tokens.size() || stop()) throw ParseError("LP text: dangling sign");
      Rational coeff(1);
      if (is_number(tokens[pos])) {
        coeff = parse_rational(tokens[pos]);
        ++pos;
        if (pos >= tokens.size() || stop() || is_number(tokens[pos])) {
          if (coeff == Rational(0)) continue;  // bare constant 0
          throw ParseError("LP text: coefficient without variable");
        }
      }
      out.push_back({sign * coeff, tokens[pos]});
      ++pos;
    }
  };

  expect("Maximize");
  expect("obj:");
  read_terms(objective, [&] { return tokens[pos] == "Subject"; });
  expect("Subject");
  expect("To");
  while (pos < tokens.size() && tokens[pos] != "Binary") {
    RawRow row;
    if (tokens[pos].back() != ':') throw ParseError("LP text: expected row label");
    row.name = tokens[pos].substr(0, tokens[pos].size() - 1);
    ++pos;
    read_terms(row.terms, [&] { return at_relation() || tokens[pos] == "Binary"; });
    if (!at_relation()) throw ParseError("LP text: row without relation");
    row.rel = tokens[pos] == "<=" ? Relation::kLe
              : tokens[pos] == "=" ? Relation::kEq
                                   : Relation::kGe;
    ++pos;
    if (pos >= tokens.size()) throw ParseError("LP text: row without rhs");
    const Rational rhs = parse_rational(tokens[pos]);
    if (rhs.denominator() != 1) throw ParseError("LP text: rhs must be integral");
    row.rhs = rhs.numerator();
    ++pos;
    rows.push_back(std::move(row));
  }
  expect("Binary");
  while (pos < tokens.size() && tokens[pos] != "End") {
    model.variables.push_back(tokens[pos]);
    ++pos;
  }
  expect("End");

  for (const RawTerm& term : objective) {
    const int var = model.index_of(term.name);
    if (var < 0) throw ParseError("LP text: unknown variable " + term.name);
    model.objective.push_back({var, term.coeff});
  }
  for (RawRow& raw : rows) {
    LpRow row;
    row.name = std::move(raw.name);
    row.rel = raw.rel;
    row.rhs = raw.rhs;
    for (const RawTerm& term : raw.terms) {
      const int var = model.index_of(term.name);
      if (var < 0) throw ParseError("LP text: unknown variable " + term.name);
      if (term.coeff.denominator() != 1) {
        throw ParseError("LP text: row coefficients must be integral");
      }
      row.terms.push_back({var, term.coeff.numerator()});
    }
    model.rows.push_back(std::move(row));
  }
  return model;
}

// Transcribes a schedule into a 0/1 valuation of every model variable:
// ep from hover states, k from transit states, st at each trip's departure
// step, fd where demand meets presence, and the (p,q) pairs from the implied
// series differences. The transcription is mechanical, so an invalid schedule
// yields an assignment that violates the corresponding rows.
inline Assignment assignment_from_schedule(const Instance& inst,
                                           const Schedule& sched,
                                           const LpModel& model) {
  const VarLayout& L = model.layout;
  if (L.nodes != inst.num_nodes() || L.horizon != inst.horizon ||
      L.agents != inst.num_agents()) {
    throw ModelError("model shape does not match the instance");
  }
  if (sched.num_agents() != inst.num_agents()) {
    throw ModelError("schedule does not match the instance agent count");
  }
  const int N = L.nodes, H = L.horizon, A = L.agents;

  Assignment asg;
  asg.value.assign(static_cast<std::size_t>(L.total), 0);
  for (int a = 0; a < A; ++a) {
    const Trajectory& traj = sched.trajectories[a];
    if (static_cast<int>(traj.size()) != H) {
      throw ModelError("trajectory length does not match the horizon");
    }
    for (int t = 0; t < H; ++t) {
      const AgentState& s = traj[t];
      if (s.is_hover()) {
        asg.value[L.ep(s.node, a, t)] = 1;
      } else {
        asg.value[L.k(s.origin, s.dest, a, t)] = 1;
        if (s.step == 1 && t >= 1) {
          asg.value[L.st(s.origin, s.dest, a, t - 1)] = 1;
        }
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int t = 0; t < H; ++t) {
      if (!inst.demand.at(n, t)) continue;
      for (int a = 0; a < A; ++a) {
        if (asg.value[L.ep(n, a, t)]) {
          asg.value[L.fd(n, t)] = 1;
          break;
        }
      }
    }
  }
  auto fill_abs = [&](auto series_at, auto abs_at, int j_lo, int j_hi) {
    for (int j = j_lo; j <= j_hi; ++j) {
      const int now = j <= H - 1 ? series_at(j) : 0;
      const int prev = j >= 1 ? series_at(j - 1) : 0;
      const int diff = now - prev;
      if (diff == 1) asg.value[abs_at(j, false)] = 1;
      if (diff == -1) asg.value[abs_at(j, true)] = 1;
    }
  };
  for (int n = 0; n < N; ++n) {
    for (int np = 0; np < N; ++np) {
      if (np == n) continue;
      for (int a = 0; a < A; ++a) {
        fill_abs([&](int t) { return static_cast<int>(asg.value[L.k(n, np, a, t)]); },
                 [&](int j, bool q) { return L.absk(n, np, a, j, q); }, 0, H);
        fill_abs([&](int t) { return static_cast<int>(asg.value[L.st(n, np, a, t)]); },
                 [&](int j, bool q) { return L.absst(n, np, a, j, q); }, 0, H);
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int a = 0; a < A; ++a) {
      fill_abs([&](int t) { return static_cast<int>(asg.value[L.ep(n, a, t)]); },
               [&](int j, bool q) { return L.absep(n, a, j, q); }, 1, H - 1);
    }
  }
  return asg;
}

// Checks every row and computes the exact rational objective. Infeasibility
// is reported as data, not thrown.
inline EvaluationResult evaluate_assignment(const LpModel& model,
                                            const Assignment& asg) {
  if (asg.value.size() != model.variables.size()) {
    throw ModelError("assignment must value every model variable");
  }
  EvaluationResult result;
  for (const LpRow& row : model.rows) {
    long long lhs = 0;
    for (const LinearTerm& term : row.terms) {
      lhs += term.coeff * asg.value[term.var];
    }
    const bool ok = row.rel == Relation::kLe   ? lhs <= row.rhs
                    : row.rel == Relation::kEq ? lhs == row.rhs
                                               : lhs >= row.rhs;
    if (!ok) result.violations.push_back(row.name);
  }
  result.feasible = result.violations.empty();
  result.objective = Rational(0);
  for (const ObjectiveTerm& term : model.objective) {
    if (asg.value[term.var]) result.objective += term.coeff;
  }
  return result;
}

}  // namespace dronesched
