import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from lfsr.synthetic import Layer, SyntheticSceneSpec

STUBS = Path(__file__).parent / "stubs"

def stub_command(name, *args):
    return " ".join([sys.executable, str(STUBS / name), *args])

def random_view(rng, h=24, w=20):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)

def layered_scenes():
    """Multi-layer scenes with fractional disparities."""
    F = Fraction
    return [
        SyntheticSceneSpec([
            Layer(F(1, 4), {"kind": "sinusoid"}),
            Layer(F(3, 4), {"kind": "noise", "smooth": 2, "amplitude": 90},
                  {"kind": "rect", "y": 30, "x": 36, "h": 60, "w": 50}),
        ], seed=1),
        SyntheticSceneSpec([
            Layer(F(-1, 2), {"kind": "checker", "period": 11}),
            Layer(F(1, 2), {"kind": "noise", "smooth": 1},
                  {"kind": "disk", "cy": 64, "cx": 60, "r": 30}),
        ], seed=2),
        SyntheticSceneSpec([
            Layer(F(1, 3), {"kind": "noise", "smooth": 3, "amplitude": 110}),
            Layer(F(-2, 3), {"kind": "stripes", "period": 9, "orientation": "horizontal"},
                  {"kind": "rect", "y": 10, "x": 10, "h": 50, "w": 100}),
            Layer(F(5, 4), {"kind": "sinusoid"}, {"kind": "disk", "cy": 90, "cx": 80, "r": 22}),
        ], seed=3),
    ]
