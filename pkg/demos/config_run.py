"""
Driving runs from YAML
======================

The same runs the command line performs, called from Python. The configs
in configs/ describe the built-in heat problem, a custom diagonal family
with expressions in m and t, and a dense 2x2 system.
"""

from pathlib import Path

from twopoint.cli import run_convergence, run_solve
from twopoint.config import build_problem, load_config

root = Path(__file__).resolve().parent.parent / "configs"

spec = load_config(root / "diagonal.yaml")
print(spec)
print(build_problem(spec).family.eigenvalues(0.0))

# %%
# Without an exact solution the diagonal runs compare against the
# integrating-factor oracle.
print(run_solve(spec, ns=[8]))

# %%
# The dense config ships its own exact solution, so a convergence study
# needs nothing else.
print(run_convergence(load_config(root / "dense.yaml"), include_wallclock=False))
