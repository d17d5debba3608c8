"""The optimal value of H(n) is computable while the optimal plan is not.

H(n): max (1+s)x + (1-s)y  st  x + y <= 1, x, y >= 0, with s the halting-driven
sequence of a machine on input n.  Its value max(1+s, 1-s) is approximated to
any precision without knowing the sign of s.  A plan is different: the
optimal vertex is (1,0) if s > 0 and (0,1) if s < 0, so any procedure that
returns a plan must commit to a side.  For a machine that never halts both
vertices are optimal, and the best the engine can do at finite fuel is locate
a good plan coarsely; the located side is not guaranteed to be stable.

    python scripts/value_without_plan.py --fuel 1024
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from fractions import Fraction

from constructive_lp import clp_engine as ce
from constructive_lp import machines as mc
from constructive_lp.gallery import doubling_schedule
from constructive_lp.numerics import Interval, coarse_locate, crn_approx, crn_from_rational, dyadic, locate_halves


@dataclass
class GapConfig:
    fuel: int = 256
    n: int = 1
    eps_bits: int = 16


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fuel", type=int, default=GapConfig.fuel)
    ap.add_argument("--n", type=int, default=GapConfig.n)
    ap.add_argument("--eps-bits", type=int, default=GapConfig.eps_bits)
    a = ap.parse_args(argv)
    cfg = GapConfig(a.fuel, a.n, a.eps_bits)

    eps = dyadic(cfg.eps_bits)
    seg = Interval(Fraction(0), Fraction(1))
    e0, e1 = locate_halves(seg)
    for name, mach in [("halts_at(3,1)", mc.halts_at(3, 1)), ("halts_at(4,0)", mc.halts_at(4, 0)),
                       ("never_halts", mc.never_halts())]:
        value = crn_approx(ce.optimal_value_crn_H(mach, cfg.n), eps)
        print(f"{name}: value ~ {value} (within 2^-{cfg.eps_bits})")
        p = ce.family("H", "M", cfg.n)
        env = {"M": mach}
        for fuel in doubling_schedule(cfg.fuel):
            relax, outer, inner = ce._levels(p, env).solved(fuel)
            x = relax.split.to_original(inner.plan)[0]
            bit = coarse_locate(crn_from_rational(x), seg)
            vb = ce.value_bounds(p, fuel, env)
            side = e0 if bit == 0 else e1
            print(f"  fuel {fuel:5d}: bounds [{vb.lower}, {vb.upper}]  best plan x={x}  located in E_{bit}=[{side.lo}, {side.hi}]")


if __name__ == "__main__":
    main()
