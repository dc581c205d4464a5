"""PSO designs at Eb/N0 = 10 dB for several weights and seeds."""

import time
from dataclasses import dataclass

import numpy as np

from _common import parse_config, print_rows, save
from gammashape.design import DesignConfig, default_candidates, pso_optimize


@dataclass
class Config:
    """PSO design sweep."""
    omegas: tuple = (0.95, 0.6, 0.05)
    n_seeds: int = 5
    ebn0_db: float = 10.0
    n_iters: int = 1000
    n_particles: int = 5
    n_mc: int = 1000
    likelihood: str = "planar"
    out_dir: str = "results"


def run(cfg: Config):
    cand = default_candidates()
    rows = []
    for w in cfg.omegas:
        for seed in range(cfg.n_seeds):
            t = time.perf_counter()
            r = pso_optimize(cand, DesignConfig.at_ebn0(cfg.ebn0_db, omega_d=w, seed=seed, n_iters=cfg.n_iters,
                                                       n_particles=cfg.n_particles, n_mc=cfg.n_mc,
                                                       likelihood=cfg.likelihood))
            rows.append({"omega_d": w, "seed": seed, "alpha_star": r.alpha_star, "beta_star": r.beta_star,
                         "objective": r.objective, "pd_avg": r.metrics.avg_pd,
                         "mi_norm": r.metrics.mi_normalized, "seconds": time.perf_counter() - t})
    for w in cfg.omegas:
        sel = [r for r in rows if r["omega_d"] == w]
        print(f"omega_d={w}: median alpha*={np.median([r['alpha_star'] for r in sel]):.3f} "
              f"median beta*={np.median([r['beta_star'] for r in sel]):.3f}")
    return rows


if __name__ == "__main__":
    cfg = parse_config(Config)
    rows = run(cfg)
    print_rows(rows)
    save(cfg.out_dir, "pso_designs", rows, cfg)
