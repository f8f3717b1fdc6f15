"""Payments for quitting smoking during pregnancy: counting defiers at n=612.

A published experiment randomized half of 612 pregnant smokers to a payment
arm; 69/306 quit under payment versus 26/306 under usual care.  Payments can
crowd out intrinsic motivation, so defiers are plausible.  The exhaustive
grid search here scans all 38,579,155 joint type-count vectors.
"""
import time
from pathlib import Path

from defiers import (
    AnalysisRequest,
    CompletelyRandomized,
    ExperimentData,
    analyze,
)
from defiers.reports import render_text, report_to_json

x = ExperimentData(i1=69, i0=237, c1=26, c0=280)
design = CompletelyRandomized(m=306, n=612)

start = time.perf_counter()
report = analyze(
    AnalysisRequest(design=design, data=x),
    progress=lambda msg: print(f"  ... {msg}"),
)
elapsed = time.perf_counter() - start
print()
print(render_text(report))

est = report.mle.estimate
same = set(report.monotonicity.maximizers) == set(report.mle.maximizers)
print("headline numbers:")
print(f"  grid search over 38.6M candidates took {elapsed:.1f}s")
print(f"  MLE finds no defiers: {est.counts()}")
print(f"  the restricted no-defier/no-complier search agrees: {same}")
print("  so the data support monotonicity here without assuming it,")
print(f"  but weakly: the 95% credible defier range is "
      f"{report.credible.de_range[0]}...{report.credible.de_range[1]} "
      f"({report.credible.de_range[1]/report.n:.0%} of the sample)")

out = Path("output")
out.mkdir(exist_ok=True)
(out / "smoking_cessation_report.json").write_text(report_to_json(report))
print(f"\nwrote {out}/smoking_cessation_report.json")
