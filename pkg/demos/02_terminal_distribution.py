"""The exact distribution of where a monitored trial stops.

The terminal state (M, S) = (patients enrolled, responders) has mass
f(m, s | p) = c * p^s * (1-p)^(m-s), with c counting the response
sequences that first hit the boundary at (m, s).  The counts come from
a lattice recursion; an all-sequences enumeration certifies them here.
"""

from curtailseq import (
    Hypotheses,
    brute_force_oracle,
    build_distribution,
    exact_power,
    expected_sample_size,
    search_design,
    terminal_pmf,
)
from curtailseq.distribution import support_table

design = search_design(Hypotheses(0.1, 0.55)).design
dist = build_distribution(design)

# The support in stage-wise order: futility stops (worst first), then
# efficacy stops with later stops ranked below earlier ones.
print(f"terminal support of (u={design.u}, K={design.K}):")
for row in support_table(dist, p_values=[0.1, 0.55]):
    print(f"  ({row['m']:>2},{row['s']}) {row['kind']:<9} paths={row['c_ms']:>3} "
          f"f|0.1={row['f_at_0.1']:.5f}  f|0.55={row['f_at_0.55']:.5f}")

# Sanity: the mass sums to one at any response rate.
for p in (0.0, 0.25, 0.55, 1.0):
    total = dist.pmf_vector(p).sum()
    print(f"total mass at p={p}: {total:.15f}")

# Independent check: enumerate all 2^K response sequences and accumulate
# where each one stops.  The lattice recursion matches to 1e-15.
oracle = brute_force_oracle(design, 0.3)
worst = max(abs(oracle[(o.m, o.s)] - terminal_pmf(dist, o.m, o.s, 0.3))
            for o in dist.support)
print(f"\nenumeration vs recursion, worst gap at p=0.3: {worst:.2e}")

# Everything downstream is an expectation over this support.
for p in (0.1, 0.35, 0.55):
    print(f"p={p}: P(success)={exact_power(dist, p):.4f}  "
          f"E[patients]={expected_sample_size(dist, p):.3f}")

# Curtailment keeps the trial short on both ends: certain failure stops
# at stage K - u + 1, certain success at stage u.
print(f"\nE[patients] at p=0: {expected_sample_size(dist, 0.0):.0f} "
      f"(= K - u + 1 = {design.K - design.u + 1})")
print(f"E[patients] at p=1: {expected_sample_size(dist, 1.0):.0f} (= u = {design.u})")
