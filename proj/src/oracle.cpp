#include "platoon/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "platoon/metrics.hpp"

namespace platoon {

double analytic_single_sender_delay(const MacParams& p, int w0) {
  const FrameDurations fd = frame_durations(p);
  double expected_time = 0.0;
  double reach = 1.0;  // probability that attempt k happens
  for (int k = 0; k <= p.retry_limit; ++k) {
    const double window = static_cast<double>(contention_window(k, w0, p.retry_limit));
    expected_time += reach * ((window - 1.0) / 2.0 * p.slot_us + fd.t_success_us);
    reach *= p.p_error;
  }
  const double delivered = 1.0 - reach;
  if (delivered <= 0.0) return std::numeric_limits<double>::infinity();
  return expected_time / delivered;
}

double two_node_collision_probability(const MacParams& p, int w0_first, int w0_second) {
  p.validate();
  const int stages = p.retry_limit + 1;
  struct Side {
    std::vector<std::int64_t> window, offset;
    std::int64_t states = 0;
  };
  auto make_side = [&](int w0) {
    Side s;
    for (int k = 0; k < stages; ++k) {
      s.offset.push_back(s.states);
      s.window.push_back(contention_window(k, w0, p.retry_limit));
      s.states += s.window.back();
    }
    return s;
  };
  const Side a = make_side(w0_first);
  const Side b = make_side(w0_second);
  if (a.states * b.states > 20'000'000) throw InvalidArgument("two_node_collision_probability: state space too large");

  // A round starts with both vehicles counting from a common instant: after a
  // lone transmission the loser keeps its residual counter, after a collision
  // both redraw at the next stage (or restart after the retry limit).
  const auto next_stage = [&](int k) { return k == p.retry_limit ? 0 : k + 1; };
  const std::size_t total = static_cast<std::size_t>(a.states * b.states);
  std::vector<double> pi(total, 0.0), nxt(total);
  for (std::int64_t ca = 0; ca < a.window[0]; ++ca)
    for (std::int64_t cb = 0; cb < b.window[0]; ++cb)
      pi[static_cast<std::size_t>(ca * b.states + cb)] = 1.0 / static_cast<double>(a.window[0] * b.window[0]);

  std::vector<double> collided(static_cast<std::size_t>(stages * stages));
  for (int iter = 0; iter < 20000; ++iter) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    std::fill(collided.begin(), collided.end(), 0.0);
    for (int ka = 0; ka < stages; ++ka) {
      for (std::int64_t ca = 0; ca < a.window[ka]; ++ca) {
        const std::int64_t ia = a.offset[ka] + ca;
        for (int kb = 0; kb < stages; ++kb) {
          for (std::int64_t cb = 0; cb < b.window[kb]; ++cb) {
            const double mass = pi[static_cast<std::size_t>(ia * b.states + b.offset[kb] + cb)];
            if (mass == 0.0) continue;
            if (ca == cb) {
              collided[static_cast<std::size_t>(next_stage(ka) * stages + next_stage(kb))] += mass;
            } else if (ca < cb) {
              const double share = mass / static_cast<double>(a.window[0]);
              const std::int64_t jb = b.offset[kb] + (cb - ca);
              for (std::int64_t c = 0; c < a.window[0]; ++c) nxt[static_cast<std::size_t>(c * b.states + jb)] += share;
            } else {
              const double share = mass / static_cast<double>(b.window[0]);
              const std::int64_t ja = a.offset[ka] + (ca - cb);
              for (std::int64_t c = 0; c < b.window[0]; ++c) nxt[static_cast<std::size_t>(ja * b.states + c)] += share;
            }
          }
        }
      }
    }
    for (int ka = 0; ka < stages; ++ka) {
      for (int kb = 0; kb < stages; ++kb) {
        const double mass = collided[static_cast<std::size_t>(ka * stages + kb)];
        if (mass == 0.0) continue;
        const double share = mass / static_cast<double>(a.window[ka] * b.window[kb]);
        for (std::int64_t ca = 0; ca < a.window[ka]; ++ca)
          for (std::int64_t cb = 0; cb < b.window[kb]; ++cb)
            nxt[static_cast<std::size_t>((a.offset[ka] + ca) * b.states + b.offset[kb] + cb)] += share;
      }
    }
    // Lazy step: same stationary law, no periodicity.
    double change = 0.0;
    for (std::size_t s = 0; s < total; ++s) {
      const double v = 0.5 * (pi[s] + nxt[s]);
      change += std::abs(v - pi[s]);
      pi[s] = v;
    }
    if (change < 1e-13) break;
  }

  double attempts = 0.0;
  double collisions = 0.0;
  for (int ka = 0; ka < stages; ++ka)
    for (std::int64_t ca = 0; ca < a.window[ka]; ++ca)
      for (int kb = 0; kb < stages; ++kb)
        for (std::int64_t cb = 0; cb < b.window[kb]; ++cb) {
          const double mass = pi[static_cast<std::size_t>((a.offset[ka] + ca) * b.states + b.offset[kb] + cb)];
          if (ca <= cb) attempts += mass;
          if (ca == cb) collisions += mass;
        }
  return collisions / attempts;
}

std::int64_t GridSpec::combinations() const {
  if (candidates.empty()) return 0;
  std::int64_t total = 1;
  for (const auto& c : candidates) {
    total *= static_cast<std::int64_t>(c.size());
    if (total > kGridLimit) return total;
  }
  return total;
}

GridResult grid_search(const GridSpec& spec, const Evaluator& evaluator, int jobs) {
  const std::int64_t count = spec.combinations();
  if (count <= 0) throw InvalidArgument("grid_search: empty candidate set");
  if (count > kGridLimit) {
    throw InvalidArgument("grid_search: enumeration guard exceeded (more than " + std::to_string(kGridLimit) +
                          " combinations)");
  }
  std::vector<std::vector<int>> sorted = spec.candidates;
  for (auto& c : sorted) std::sort(c.begin(), c.end());

  // Mixed-radix enumeration in lexicographic order.
  const std::size_t n = sorted.size();
  std::vector<GridRow> rows(static_cast<std::size_t>(count));
  for (std::int64_t idx = 0; idx < count; ++idx) {
    std::vector<int> cw(n);
    std::int64_t rest = idx;
    for (std::size_t i = n; i-- > 0;) {
      const auto radix = static_cast<std::int64_t>(sorted[i].size());
      cw[i] = sorted[i][static_cast<std::size_t>(rest % radix)];
      rest /= radix;
    }
    rows[static_cast<std::size_t>(idx)].cw = CwCombination(std::move(cw));
  }

  parallel_for(static_cast<int>(count), jobs, [&](int k) {
    GridRow& row = rows[static_cast<std::size_t>(k)];
    const DelayVector d = evaluator(row.cw);
    row.objective = swarm_objective(d, spec.target_us);
    row.mean_delay_us = mean(d);
  });

  GridResult result;
  std::size_t best = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].objective < rows[best].objective ||
        (rows[k].objective == rows[best].objective && rows[k].cw < rows[best].cw)) {
      best = k;
    }
  }
  result.best = rows[best].cw;
  result.best_value = rows[best].objective;
  result.rows = std::move(rows);
  return result;
}

void write_grid_csv(std::ostream& os, const GridResult& result) {
  os << "cw,objective_us2,mean_delay_ms\n";
  for (const GridRow& r : result.rows) {
    for (std::size_t i = 0; i < r.cw.size(); ++i) os << (i ? ";" : "") << r.cw[i];
    os << ',' << r.objective << ',' << r.mean_delay_us / 1000.0 << '\n';
  }
}

}  // namespace platoon
