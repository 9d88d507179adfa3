"""The two robustness metrics on reference precision traces.

A metric series holds one accuracy measure sampled along an error-rate grid.
Sensibility sums the absolute jump between neighboring grid points, so a
flat algorithm scores 0 no matter how good or bad it is.  The keeping point
is the last rate before accuracy first drops more than k below the clean
baseline, so it reads as "how much dirt this algorithm tolerates".
"""
import numpy as np

from dirtybench import MetricSeries, keeping_point, sensibility

RATES = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0)  # percent missing

# Decision-tree precision traces (percent) from five benchmark datasets.
TRACES = {
    "iris": (78.37, 84.16, 78.08, 74.36, 64.99, 58.71),
    "ecoli": (63.47, 62.93, 53.97, 50.93, 48.07, 34.5),
    "car": (81.33, 60.93, 43.7, 42.87, 40.47, 35.47),
    "chess": (82.17, 78.17, 76.53, 75.77, 75.9, 75.57),
    "adult": (80.5, 75.27, 71.3, 72.93, 71.53, 67.23),
}

print(f"{'dataset':8s} {'sensibility':>12s} {'keeping point (k=10%)':>22s}")
sens_values, kp_values = [], []
for name, trace in TRACES.items():
    s = MetricSeries(RATES, trace, direction="higher")
    sv = sensibility(s)
    kp = keeping_point(s, k=10.0)
    sens_values.append(sv)
    kp_values.append(kp)
    print(f"{name:8s} {sv:11.2f}% {kp:20.0f}%")

print(f"{'mean':8s} {np.mean(sens_values):11.2f}% {np.mean(kp_values):20.0f}%")

# Chess barely moves (sensibility 6.86) and never breaches the threshold, so
# its keeping point sits at the end of the grid; Car collapses immediately,
# so its keeping point is 0%.

# For lower-is-better measures (e.g. regression error), flip the direction:
errors = MetricSeries(RATES, (0.40, 0.45, 0.48, 0.55, 0.70, 0.95), direction="lower")
print("\nregression-style series, k=0.1:",
      f"sensibility={sensibility(errors):.2f},",
      f"keeping point={keeping_point(errors, k=0.1):.0f}%")
