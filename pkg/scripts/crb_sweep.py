"""Averaged reflection-coefficient CRB versus Eb/N0 and Gamma shape."""

from dataclasses import dataclass

import numpy as np

from _common import parse_config, print_rows, save
from gammashape.bounds import crb_average, crb_conditional, crb_mc_estimate, power_scaled_params
from gammashape.cli import PRESETS
from gammashape.constellation import psk
from gammashape.gamma import GammaParams
from gammashape.metrics import ebn0_to_noise_variance
from gammashape.rng import DEFAULT_SEED


@dataclass
class Config:
    """CRB sweep; 16-PSK gives the constant-modulus reference."""
    ebn0_db: tuple = tuple(float(x) for x in range(16))
    n_mc: int = 10 ** 7
    seed: int = DEFAULT_SEED
    out_dir: str = "results"


def run(cfg: Config):
    rows = []
    ref = psk(16)
    for eb in cfg.ebn0_db:
        s2 = ebn0_to_noise_variance(eb, 16)
        row = {"ebn0_db": eb, "psk16": float(np.mean(crb_conditional(np.abs(ref.points), s2)))}
        for name, (a, b) in PRESETS.items():
            p = power_scaled_params(GammaParams(a, b))
            row[f"{name}_closed"] = crb_average(p, s2)
            row[f"{name}_mc"], row[f"{name}_mc_stderr"] = crb_mc_estimate(p, s2, cfg.n_mc, cfg.seed)
        rows.append(row)
    return rows


if __name__ == "__main__":
    cfg = parse_config(Config)
    rows = run(cfg)
    print_rows(rows)
    save(cfg.out_dir, "crb_sweep", rows, cfg)
