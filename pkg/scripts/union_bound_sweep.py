"""Gamma-mixture union bound against simulated ML SER over Eb/N0."""

from dataclasses import dataclass

from _common import parse_config, print_rows, save
from gammashape.bounds import average_pep_craig, average_pep_mixture, fit_distance_mixture, ser_union_bound
from gammashape.cli import PRESETS
from gammashape.design import default_candidates, select_constellation
from gammashape.gamma import GammaParams
from gammashape.metrics import ebn0_to_noise_variance
from gammashape.rng import DEFAULT_SEED
from gammashape.sim import simulate_ser


@dataclass
class Config:
    """Union bound sweep; the radar design uses a higher mixture order."""
    ebn0_db: tuple = tuple(float(x) for x in range(16))
    L_radar: int = 4
    L_other: int = 3
    n_fit: int = 10 ** 6
    restarts: int = 1
    n_symbols: int = 10 ** 6
    seed: int = DEFAULT_SEED
    out_dir: str = "results"


def run(cfg: Config):
    rows = []
    for name, (a, b) in PRESETS.items():
        L = cfg.L_radar if name == "radar" else cfg.L_other
        fit, _ = fit_distance_mixture(GammaParams(a, b), L, cfg.n_fit, 0, restarts=cfg.restarts)
        c = select_constellation(default_candidates(), GammaParams(a, b), 16)
        for k, eb in enumerate(cfg.ebn0_db):
            s2 = ebn0_to_noise_variance(eb, 16, c.avg_power)
            pep = average_pep_mixture(fit.mixture, s2).avg_pep
            ser, se = simulate_ser(c, s2, cfg.n_symbols, cfg.seed + k)
            rows.append({"design": name, "L": L, "ebn0_db": eb, "pep": pep,
                         "pep_craig": average_pep_craig(fit.mixture, s2),
                         "union_bound": ser_union_bound(16, pep)[0], "ser": ser, "ser_stderr": se})
    return rows


if __name__ == "__main__":
    cfg = parse_config(Config)
    rows = run(cfg)
    print_rows(rows)
    save(cfg.out_dir, "union_bound_sweep", rows, cfg)
