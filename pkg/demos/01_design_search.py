"""Finding a sequential design: threshold, maximum size, futility staircase.

A single-arm trial watches the cumulative responder count after every
patient.  The trial succeeds the moment the count reaches a fixed
threshold u; it stops for futility the moment the threshold becomes
unreachable.  This script walks the grid search that picks (u, K) for a
given testing problem and prints the resulting stopping boundaries.
"""

from curtailseq import (
    Hypotheses,
    classify_state,
    operating_characteristics,
    search_design,
)

# The testing problem: a 10% response rate is uninteresting, 55% is
# what we expect from the new regimen; one-sided level 2.5%, power 80%.
hyp = Hypotheses(p0=0.1, p1=0.55, alpha_nom=0.025, beta_nom=0.2)

# The error rate and power of a candidate (u, K) are exact tail sums of
# the first-passage distribution of the u-th response.  Scan a few
# candidates to see the trade-off: small u is cheap but weak.
print("candidate designs under", hyp)
for u in (2, 3, 4):
    for K in (u, u + 3, u + 5, 9, 11):
        if K < u:
            continue
        oc = operating_characteristics(u, K, hyp)
        flag = "ok" if oc.alpha_actual <= 0.025 and oc.power >= 0.8 else "  "
        print(f"  u={u} K={K:>2}  alpha={oc.alpha_actual:.4f}  power={oc.power:.3f}  {flag}")

# The search automates this: smallest u admitting a feasible K, then the
# smallest such K.  Enrollment may overshoot up to k_max without
# breaking the error-rate guarantee.
result = search_design(hyp)
design = result.design
print(f"\nselected: u={design.u}, K={design.K}")
print(f"feasible maximum sizes: {result.feasible_k} (overshoot allowed up to {result.k_max})")
print(f"achieved: alpha={design.alpha_actual:.4f}, power={design.power:.4f}")

# Futility bounds by stage.  A negative bound means a futility stop is
# impossible there; the first reachable stop is all-failures at stage
# K - u + 1.
print("\nstage:          ", *(f"{k:>3}" for k in range(1, design.K + 1)))
print("futility bound: ", *(f"{design.futility_bound(k):>3}" for k in range(1, design.K + 1)))

# The per-patient decision rule in action: 3 responders among the first
# 5 patients, then a fourth response stops the trial for efficacy.
history = [True, False, True, False, True, True]
s = 0
for k, responder in enumerate(history, start=1):
    s += responder
    print(f"patient {k}: responders={s} -> {classify_state(design, k, s).value}")
