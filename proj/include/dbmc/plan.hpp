#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "dbmc/distribution.hpp"
#include "dbmc/error.hpp"
#include "dbmc/state_space.hpp"

namespace dbmc {

// A maximal run of adjacent states along one coordinate: the states obtained
// from `anchor` by writing symbols first_symbol..first_symbol+length-1 at
// `coord`. For q = 2 a full run is exactly an adjacent pair.
struct SupportRun {
  StateIndex anchor = 0;  // representative with first_symbol at coord
  int coord = 0;
  int first_symbol = 0;
  int length = 2;
};

// One adjacent pair with a flip action attached. The two states differ in a
// single coordinate. Every endpoint that lies in the current support is a
// source: it sends `fraction` of its mass to the state obtained by writing
// flip_symbol at flip_coord. Fractions are per endpoint since the two sources
// of a pair generally shed different fractions.
struct SharingPair {
  StateIndex first = 0;
  StateIndex second = 0;  // first < second in enumeration order
  int flip_coord = 0;
  int flip_symbol = 1;
  double fraction_first = 0.0;
  double fraction_second = 0.0;
};

struct SharingStep {
  std::vector<SharingPair> pairs;
};

// A single mass movement source -> target extracted from a step.
struct SharingFlow {
  StateIndex source;
  StateIndex target;
  double fraction;
  int pair_index;
};

namespace detail {
inline void check_fraction(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw domain_error("sharing fraction must lie in [0, 1]");
}
}  // namespace detail

// Validates a step against the support it acts on and lists its flows in pair
// order. Pairs must be adjacent, pairwise disjoint, with distinct flip
// coordinates; every endpoint inside the support must actually move somewhere
// else when flipped.
inline std::vector<SharingFlow> step_flows(const SupportSet& support, const SharingStep& step) {
  const StateSpace& space = support.space();
  const int n = space.units(), q = space.alphabet();
  if (static_cast<int>(step.pairs.size()) > n)
    throw plan_error("a step carries at most one pair per coordinate");
  std::vector<StateIndex> used_states;
  std::vector<int> used_coords;
  std::vector<SharingFlow> flows;
  for (std::size_t pi = 0; pi < step.pairs.size(); ++pi) {
    const SharingPair& pr = step.pairs[pi];
    if (pr.first >= pr.second) throw plan_error("pair states must be ordered");
    State a = space.decode(pr.first), b = space.decode(pr.second);
    if (!hamming_adjacent(a, b)) throw plan_error("pair states must be adjacent");
    if (pr.flip_coord < 0 || pr.flip_coord >= n) throw plan_error("flip coordinate out of range");
    if (pr.flip_symbol < 0 || pr.flip_symbol >= q) throw plan_error("flip symbol out of range");
    detail::check_fraction(pr.fraction_first);
    detail::check_fraction(pr.fraction_second);
    for (StateIndex s : {pr.first, pr.second}) {
      if (std::find(used_states.begin(), used_states.end(), s) != used_states.end())
        throw plan_error("pairs within a step must be disjoint");
      used_states.push_back(s);
    }
    if (std::find(used_coords.begin(), used_coords.end(), pr.flip_coord) != used_coords.end())
      throw plan_error("flip coordinates within a step must be distinct");
    used_coords.push_back(pr.flip_coord);

    bool any_source = false;
    for (int e = 0; e < 2; ++e) {
      StateIndex s = e == 0 ? pr.first : pr.second;
      double f = e == 0 ? pr.fraction_first : pr.fraction_second;
      if (!support.contains(s)) continue;
      any_source = true;
      State src = space.decode(s);
      if (src[static_cast<std::size_t>(pr.flip_coord)] == pr.flip_symbol)
        throw plan_error("a source must move when flipped");
      StateIndex tgt = space.encode(flip(src, pr.flip_coord, pr.flip_symbol));
      flows.push_back(SharingFlow{s, tgt, f, static_cast<int>(pi)});
    }
    if (!any_source) throw plan_error("every pair must intersect the support");
  }
  return flows;
}

// Stronger validation used by the planner and the compiler: flow targets must
// be new (outside the support) and pairwise distinct, so that un-sharing can
// return each target's mass to a unique source.
inline std::vector<SharingFlow> step_flows_clean(const SupportSet& support,
                                                 const SharingStep& step) {
  std::vector<SharingFlow> flows = step_flows(support, step);
  std::vector<StateIndex> targets;
  for (const SharingFlow& f : flows) {
    if (support.contains(f.target)) throw plan_error("flow target already in the support");
    if (std::find(targets.begin(), targets.end(), f.target) != targets.end())
      throw plan_error("two flows cannot land on the same state");
    targets.push_back(f.target);
  }
  return flows;
}

inline SupportSet apply_step(const SupportSet& support, const SharingStep& step) {
  SupportSet out = support;
  for (const SharingFlow& f : step_flows_clean(support, step)) out.insert(f.target);
  return out;
}

// Exact linear action of a sharing step on a distribution supported on
// `support`: each source keeps (1 - fraction) of its mass and sends the rest
// to its flip target. This is the map the constructed layer approximates.
inline Distribution sharing_map(const SupportSet& support, const SharingStep& step,
                                const Distribution& p) {
  if (p.space != support.space()) throw dimension_error("distribution on a different space");
  std::vector<double> out(p.probs);
  for (const SharingFlow& f : step_flows(support, step)) {
    double moved = f.fraction * p.probs[f.source];
    out[f.source] -= moved;
    out[f.target] += moved;
  }
  return Distribution(p.space, out);
}

// Inverse of sharing_map on clean steps: returns each new point's mass to its
// source and reports the fractions that reproduce `next` going forward
// (0/0 resolves to fraction 0).
struct UnshareResult {
  Distribution previous;
  SharingStep step_with_fractions;
};

inline UnshareResult unshare(const SupportSet& support, const SharingStep& step,
                             const Distribution& next) {
  if (next.space != support.space()) throw dimension_error("distribution on a different space");
  std::vector<SharingFlow> flows = step_flows_clean(support, step);
  std::vector<double> prev(next.probs);
  SharingStep solved = step;
  for (const SharingFlow& f : flows) {
    double mass = next.probs[f.source] + next.probs[f.target];
    prev[f.source] = mass;
    prev[f.target] = 0.0;
    double rho = mass > 0.0 ? next.probs[f.target] / mass : 0.0;
    SharingPair& pr = solved.pairs[static_cast<std::size_t>(f.pair_index)];
    if (f.source == pr.first)
      pr.fraction_first = rho;
    else
      pr.fraction_second = rho;
  }
  return UnshareResult{Distribution(next.space, prev), solved};
}

// Support growth schedule: start from a union of runs realizable by one RBM,
// then repeatedly add the flip targets of a sharing step until the full cube
// is covered. supports[j] is the support after j steps.
struct SharingPlan {
  StateSpace space;
  std::vector<SupportRun> base_runs;
  std::vector<SharingStep> steps;
  std::vector<SupportSet> supports;

  const SupportSet& initial() const { return supports.front(); }
  const SupportSet& final_support() const { return supports.back(); }
  // Hidden layers of the compiled model: one RBM plus one layer per step.
  int depth() const { return 1 + static_cast<int>(steps.size()); }
};

namespace detail {

inline SupportSet run_states(const StateSpace& space, const std::vector<SupportRun>& runs) {
  std::vector<StateIndex> members;
  for (const SupportRun& r : runs) {
    State a = space.decode(r.anchor);
    if (a[static_cast<std::size_t>(r.coord)] != r.first_symbol)
      throw plan_error("run anchor must carry the run's first symbol");
    for (int s = 0; s < r.length; ++s)
      members.push_back(space.encode(flip(a, r.coord, r.first_symbol + s)));
  }
  return SupportSet(space, members);
}

// Initial support: a sub-face of the cube decomposed into runs along its last
// free coordinate, sized so one RBM with n hidden units can carry it. For the
// widths n = 2^k + k + 1 the face is the classic "last 2^k coordinates zero".
inline std::vector<SupportRun> choose_base_runs(const StateSpace& space) {
  const int n = space.units(), q = space.alphabet();
  int free_coords = 0;
  if (q == 2) {
    int special = -1;
    for (int k = 0; k <= 30; ++k) {
      long long width = (1LL << k) + k + 1;
      if (width == n) special = k;
      if (width >= n) break;
    }
    if (special >= 0)
      free_coords = n - (1 << special);
    else
      for (int j = 1; j <= n; ++j) {
        long long runs = 1LL << (j - 1);
        if (runs <= n + 1) free_coords = j;
      }
  } else {
    for (int j = 1; j <= n; ++j) {
      double runs = std::pow(static_cast<double>(q), j - 1);
      if (runs * (q - 1) <= n + 1 && runs - 1 <= n) free_coords = j;
    }
  }

  std::vector<SupportRun> runs;
  if (free_coords >= 1) {
    // anchors: free prefix of length free_coords-1, zero elsewhere
    StateSpace prefix_space(std::max(free_coords - 1, 1), q);
    StateIndex prefix_count = free_coords == 1 ? 1 : prefix_space.size();
    for (StateIndex pi = 0; pi < prefix_count; ++pi) {
      State x(static_cast<std::size_t>(n), 0);
      if (free_coords > 1) {
        State prefix = prefix_space.decode(pi);
        for (int i = 0; i + 1 < free_coords; ++i) x[static_cast<std::size_t>(i)] = prefix[i];
      }
      runs.push_back(SupportRun{space.encode(x), free_coords - 1, 0, q});
    }
  } else {
    // Alphabet too large for a full run budget: take a partial run.
    runs.push_back(SupportRun{0, n - 1, 0, std::min(q, n + 3)});
  }
  return runs;
}

struct CandidateAction {
  SharingPair pair;
  std::vector<StateIndex> touched;  // pair endpoints
  std::vector<StateIndex> targets;  // flip targets (unreached)
};

// All single-pair actions available from `support`, in enumeration order of
// (first unreached target, source, partner). Two-source pairs, which add two
// points with one coordinate, are listed before their single-source fallbacks.
inline std::vector<CandidateAction> enumerate_actions(const SupportSet& support) {
  const StateSpace& space = support.space();
  const int n = space.units(), q = space.alphabet();
  std::vector<CandidateAction> actions;
  auto add_action = [&](StateIndex s1, StateIndex s2, int coord, int symbol,
                        std::vector<StateIndex> targets) {
    SharingPair pr;
    pr.first = std::min(s1, s2);
    pr.second = std::max(s1, s2);
    pr.flip_coord = coord;
    pr.flip_symbol = symbol;
    for (const CandidateAction& a : actions)
      if (a.pair.first == pr.first && a.pair.second == pr.second &&
          a.pair.flip_coord == pr.flip_coord && a.pair.flip_symbol == pr.flip_symbol)
        return;
    CandidateAction act;
    act.pair = pr;
    act.touched = {pr.first, pr.second};
    act.targets = std::move(targets);
    actions.push_back(std::move(act));
  };

  for (StateIndex y = 0; y < space.size(); ++y) {
    if (support.contains(y)) continue;
    State ys = space.decode(y);
    for (int i = 0; i < n; ++i) {
      int yb = ys[static_cast<std::size_t>(i)];
      for (int s = 0; s < q; ++s) {
        if (s == yb) continue;
        StateIndex a = space.encode(flip(ys, i, s));
        if (!support.contains(a)) continue;
        State as = space.decode(a);
        // two-source partners: a second support state adjacent to a in another
        // coordinate whose own flip target is also new
        for (int d = 0; d < n; ++d) {
          if (d == i) continue;
          for (int s2 = 0; s2 < q; ++s2) {
            if (s2 == as[static_cast<std::size_t>(d)]) continue;
            StateIndex a2 = space.encode(flip(as, d, s2));
            if (!support.contains(a2)) continue;
            StateIndex y2 = space.encode(flip(space.decode(a2), i, yb));
            if (support.contains(y2) || y2 == y) continue;
            add_action(a, a2, i, yb, {y, y2});
          }
        }
        add_action(a, space.encode(flip(as, i, yb)), i, yb, {y});
      }
    }
  }
  // prefer actions that add two points; stable order otherwise
  std::stable_sort(actions.begin(), actions.end(),
                   [](const CandidateAction& x, const CandidateAction& y) {
                     return x.targets.size() > y.targets.size();
                   });
  return actions;
}

// Picks a compatible subset of actions covering as many unreached states as
// possible. Exhaustive search with pruning; the candidate count is small at
// the widths this library targets, and node_budget keeps it bounded anyway.
struct StepSearch {
  const std::vector<CandidateAction>* actions;
  int n;
  std::vector<int> best;
  std::size_t best_gain = 0;
  long node_budget = 200000;

  void run(std::vector<int>& chosen, std::size_t gain, std::size_t from,
           std::vector<StateIndex>& used_states, std::vector<int>& used_coords,
           std::vector<StateIndex>& used_targets) {
    if (gain > best_gain) {
      best_gain = gain;
      best = chosen;
    }
    if (--node_budget < 0) return;
    if (static_cast<int>(used_coords.size()) >= n) return;
    std::size_t remaining_coords = static_cast<std::size_t>(n) - used_coords.size();
    if (gain + 2 * remaining_coords <= best_gain) return;
    for (std::size_t idx = from; idx < actions->size(); ++idx) {
      const CandidateAction& act = (*actions)[idx];
      bool ok = std::find(used_coords.begin(), used_coords.end(), act.pair.flip_coord) ==
                used_coords.end();
      for (StateIndex s : act.touched)
        if (ok && std::find(used_states.begin(), used_states.end(), s) != used_states.end())
          ok = false;
      for (StateIndex t : act.targets) {
        if (ok && std::find(used_targets.begin(), used_targets.end(), t) != used_targets.end())
          ok = false;
        if (ok && std::find(used_states.begin(), used_states.end(), t) != used_states.end())
          ok = false;
      }
      if (!ok) continue;
      chosen.push_back(static_cast<int>(idx));
      for (StateIndex s : act.touched) used_states.push_back(s);
      used_coords.push_back(act.pair.flip_coord);
      for (StateIndex t : act.targets) {
        used_targets.push_back(t);
        used_states.push_back(t);
      }
      run(chosen, gain + act.targets.size(), idx + 1, used_states, used_coords, used_targets);
      for (std::size_t r = 0; r < act.targets.size(); ++r) {
        used_targets.pop_back();
        used_states.pop_back();
      }
      used_coords.pop_back();
      for (std::size_t r = 0; r < act.touched.size(); ++r) used_states.pop_back();
      chosen.pop_back();
    }
  }
};

}  // namespace detail

// Builds the support growth schedule for width n over alphabet q. Fractions in
// the returned steps are zero; they are solved once a target is known.
inline SharingPlan plan_supports(int n, int q = 2) {
  StateSpace space(n, q);
  SharingPlan plan{space, detail::choose_base_runs(space), {}, {}};
  SupportSet support = detail::run_states(space, plan.base_runs);
  plan.supports.push_back(support);
  while (!support.is_full()) {
    std::vector<detail::CandidateAction> actions = detail::enumerate_actions(support);
    if (actions.empty()) throw plan_error("support cannot grow further");
    detail::StepSearch search;
    search.actions = &actions;
    search.n = n;
    std::vector<int> chosen;
    std::vector<StateIndex> used_states, used_targets;
    std::vector<int> used_coords;
    search.run(chosen, 0, 0, used_states, used_coords, used_targets);
    if (search.best.empty()) throw plan_error("support cannot grow further");
    SharingStep step;
    std::vector<int> picked = search.best;
    std::sort(picked.begin(), picked.end());
    for (int idx : picked) step.pairs.push_back(actions[static_cast<std::size_t>(idx)].pair);
    support = apply_step(support, step);
    plan.steps.push_back(std::move(step));
    plan.supports.push_back(support);
  }
  return plan;
}

// Per-level targets t^1, ..., t^final obtained by pulling the target backward
// through every step: each flip target's mass returns to its source. The
// returned vector is indexed like plan.supports; fractions that make the
// forward maps reproduce the chain exactly are written into `plan_out` when
// given.
inline std::vector<Distribution> backward_targets(const Distribution& target,
                                                  const SharingPlan& plan,
                                                  SharingPlan* plan_out = nullptr) {
  if (target.space != plan.space) throw dimension_error("target on a different space");
  for (StateIndex i = 0; i < target.space.size(); ++i)
    if (target.probs[i] > 0.0 && !plan.final_support().contains(i))
      throw plan_error("target has mass outside the plan's final support");
  std::vector<Distribution> levels;
  levels.reserve(plan.steps.size() + 1);
  levels.push_back(target);
  SharingPlan solved = plan;
  for (std::size_t j = plan.steps.size(); j-- > 0;) {
    UnshareResult u = unshare(plan.supports[j], plan.steps[j], levels.back());
    solved.steps[j] = u.step_with_fractions;
    levels.push_back(std::move(u.previous));
  }
  std::reverse(levels.begin(), levels.end());
  if (plan_out) *plan_out = std::move(solved);
  return levels;
}

}  // namespace dbmc
