"""
Scenario pipeline and command-line front end
============================================

Runs the shipped scenario files through the full pipeline and prints the
check tables.  The same thing is available from the shell:

    emlab --config scenarios/ab_basic.json run
    emlab --config scenarios/exterior_kelvin.json kelvin
    emlab --config scenarios/verify_only.json verify --check hardy,diamagnetic
"""

from pathlib import Path

from emlab.scenario import parse_scenario, run_scenario

ROOT = Path(__file__).resolve().parents[1]

for name in ("ab_basic", "exterior_kelvin", "dipole", "verify_only"):
    scn = parse_scenario(ROOT / "scenarios" / f"{name}.json")
    report = run_scenario(scn)
    print(f"\n{name}: status = {report['status']} "
          f"({report['wall_clock']:.2f} s)")
    for c in report["checks"]:
        flag = "ok " if c["pass"] else "FAIL"
        print(f"  [{flag}] {c['name']:24s} {c['value']:.3e} "
              f"(tol {c['tolerance']:.0e})")
