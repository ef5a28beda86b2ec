"""Stability verdict over initial energies E0, run in parallel via the sweep subcommand.

Usage: python3 scripts/amplitude_sweep.py [OUTDIR] [WORKERS]
"""

import sys

from nsp_shock.cli import main

out = sys.argv[1] if len(sys.argv) > 1 else "runs/sweep"
workers = sys.argv[2] if len(sys.argv) > 2 else "2"
sys.exit(main([
    "sweep", "--param", "evolve.E0", "--values", "1e-5", "1e-4", "1e-3", "1e-2",
    "--set", "physical.T=1.0", "--set", "evolve.t_end=500", "--set", "evolve.snapshot_every=0",
    "--workers", workers, "--out", out,
]))
