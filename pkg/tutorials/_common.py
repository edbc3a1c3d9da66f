"""Shared helpers for the tutorial scripts: output folder and a headless backend."""

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

OUT = Path(os.environ.get("SPINOPM_TUTORIAL_OUT", Path(__file__).parent / "output"))
OUT.mkdir(parents=True, exist_ok=True)


def save(fig, name):
    path = OUT / name
    fig.savefig(path, dpi=120, bbox_inches="tight")
    print(f"wrote {path}")
