"""Shared helpers: dataclass configs as command-line flags, CSV/JSON output."""

import argparse
import csv
import dataclasses
import json
from pathlib import Path


def parse_config(cls, argv=None):
    """Build an argparse parser from the fields of dataclass ``cls``."""
    parser = argparse.ArgumentParser(description=cls.__doc__)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        flag = "--" + f.name.replace("_", "-")
        if isinstance(default, bool):
            parser.add_argument(flag, type=lambda s: s.lower() in ("1", "true", "yes"), default=default)
        elif isinstance(default, (tuple, list)):
            kind = type(default[0]) if default else float
            parser.add_argument(flag, type=kind, nargs="+", default=list(default))
        else:
            parser.add_argument(flag, type=type(default), default=default)
    ns = parser.parse_args(argv)
    vals = {k: tuple(v) if isinstance(v, list) else v for k, v in vars(ns).items()}
    return cls(**vals)


def save(out_dir, name, rows, config):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{name}.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    (out / f"{name}.config.json").write_text(json.dumps(dataclasses.asdict(config), indent=2) + "\n")
    return out / f"{name}.csv"


def print_rows(rows):
    keys = list(rows[0])
    print("  ".join(f"{k:>12s}" for k in keys))
    for r in rows:
        print("  ".join(f"{v:>12.5g}" if isinstance(v, float) else f"{str(v):>12s}" for v in r.values()))
