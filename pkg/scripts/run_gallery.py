"""Run the counterexample gallery and summarise it per family and query.

    python scripts/run_gallery.py --machines machines --fuel 256 --out gallery.jsonl
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter, defaultdict
from dataclasses import dataclass

from constructive_lp import clp_engine as ce
from constructive_lp.gallery import load_machine_dir, run_gallery


@dataclass
class GalleryConfig:
    machines: str = "machines"
    n_max: int = 2
    fuel: int = 64
    families: tuple[str, ...] = ce.FAMILIES
    out: str | None = None


def first_decided(records):
    """Smallest fuel at which each (family, machine, n, query) series decided."""
    best = {}
    for r in records:
        if r["kind"] in ("value_bounds", "locate", "load_error") or r["verdict"] == "unknown":
            continue
        key = (r["family"], r["machine"], r["n"], r["kind"])
        best[key] = min(best.get(key, r["fuel"]), r["fuel"])
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--machines", default=GalleryConfig.machines)
    ap.add_argument("--n-max", type=int, default=GalleryConfig.n_max)
    ap.add_argument("--fuel", type=int, default=GalleryConfig.fuel)
    ap.add_argument("--families", default=",".join(ce.FAMILIES))
    ap.add_argument("--out")
    a = ap.parse_args(argv)
    cfg = GalleryConfig(a.machines, a.n_max, a.fuel, tuple(a.families.split(",")), a.out)

    machines, errors = load_machine_dir(cfg.machines)
    report = run_gallery(machines, range(1, cfg.n_max + 1), cfg.fuel, cfg.families, errors)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            report.write(fh)

    decided_at = first_decided(report.records)
    table = defaultdict(Counter)
    for r in report.records:
        if r["kind"] in ("value_bounds", "locate", "load_error") or r["fuel"] != cfg.fuel:
            continue
        table[(r["family"], r["kind"])][str(r["verdict"])] += 1
    print(f"{len(report.records)} records, {len(report.mismatches)} mismatches, {len(report.surprises)} surprises")
    print(f"\nverdicts at fuel {cfg.fuel}:")
    for (fam, kind), counts in sorted(table.items()):
        print(f"  {fam}  {kind:24s} " + "  ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    print("\nfuel needed to decide (first decided level in the schedule):")
    for key, fuel in sorted(decided_at.items()):
        print(f"  {'/'.join(map(str, key)):48s} {fuel}")
    for m in report.mismatches:
        print("MISMATCH", m, file=sys.stderr)
    return 0 if report.ok else 2


if __name__ == "__main__":
    sys.exit(main())
