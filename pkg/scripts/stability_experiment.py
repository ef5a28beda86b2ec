"""Default nonlinear stability experiment (T=1, v+ - v- = 0.05, E0 = 1e-3, t_end = 2000, doubled).

Usage: python3 scripts/stability_experiment.py [OUTDIR] [SECTION.KEY=VALUE ...]
"""

import json
import sys
import time
from pathlib import Path

from nsp_shock.cli import run_evolution
from nsp_shock.config import load_config

out = Path(sys.argv[1] if len(sys.argv) > 1 else "runs/stability")
out.mkdir(parents=True, exist_ok=True)
cfg = load_config(None, ["physical.T=1.0", *sys.argv[2:]])
t0 = time.perf_counter()
verdict = run_evolution(cfg, out)
verdict.pop("config")
print(json.dumps(verdict, indent=2, default=str))
print(f"wall time {time.perf_counter() - t0:.0f} s; diagnostics in {out / 'diagnostics.csv'}")
