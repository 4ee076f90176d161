"""Measure residual constants C = max_abs / h^2 on the default scenarios.

Prints, for each family and grid check, the measured constant at each spacing
and the convergence order.  The tolerance table in ``bohmfree.verify`` uses
4x the largest measured constant per family, rounded to two significant digits.
"""

import time

from bohmfree import scenarios
from bohmfree.verify import convergence_order
from bohmfree.core import grid_with_spacing

DXS = (2e-2, 1e-2, 5e-3)

CASES = scenarios.default_scenarios() + [
    # the Legendre family is also swept over non-integer degrees (ODE route)
    scenarios.default_scenario("poschl_teller", gamma=0.5),
    scenarios.default_scenario("poschl_teller", gamma=2.0),
]

table = {}
for sc in CASES:
    if sc.family.tag == "delta_trap":
        continue
    t0 = time.time()
    rows = {}
    for dx in DXS:
        for r in scenarios.run_checks(sc, dx, overrides={c: {sc.family.tag: 1.0} for c in
                                                          ("cancellation", "continuity", "schrodinger")}):
            if r["name"] in ("cancellation", "continuity", "schrodinger"):
                dt = r["details"].get("dt", 0.0)
                rows.setdefault(r["name"], []).append((dx, r["max_abs"], r["max_abs"] / (dx**2 + dt**2)))
    for name, vals in rows.items():
        grids = [grid_with_spacing(0.0, 1.0, dx) for dx, _, _ in vals]
        try:
            order = convergence_order(None, grids, errors=[e for _, e, _ in vals])
        except Exception:  # noqa: BLE001
            order = float("nan")
        cmax = max(c for _, _, c in vals)
        key = (name, sc.family.tag)
        table[key] = max(table.get(key, 0.0), float(f"{4 * cmax:.2g}"))
        print(f"{sc.family.tag:28s} {dict(sc.family.params)!s:40s} {name:13s} C={[f'{c:.3g}' for _,_,c in vals]} order={order:.3f}"
              f" suggest={float(f'{4*cmax:.2g}')}")
    print(f"   ({time.time()-t0:.1f}s)")

print()
print("TOLERANCE_CONSTANTS: dict[tuple[str, str], float] = {")
for (check, tag), c in table.items():
    print(f'    ("{check}", "{tag}"): {c},')
print("}")
