"""
Sweeping the window size
========================

The sweep helper behind ``anticonc sweep`` varies one parameter of a base
scenario and collects one report per value; here tau for ten equal weights.
"""
import numpy as np

from anticonc import DiscreteDist1D, Scenario, WeightMatrix
from anticonc.bounds import reports_to_csv
from anticonc.cli import sweep_reports

base = Scenario(WeightMatrix(np.ones(10)), DiscreteDist1D([-1.0, 1.0], [0.5, 0.5]), 0.5, 1.0)
rows = sweep_reports(base, "tau", [0.25, 0.5, 1.0, 2.0, 4.0])
print(reports_to_csv(rows), end="")
