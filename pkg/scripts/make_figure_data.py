#!/usr/bin/env python3
"""Emit the data behind the two reference figures as CSV tables.

Figure 1 analogue: the damped oscillation of E_rho(-x) at rho = 1.9.
Figure 2 analogue: the Pochhammer-weighted mixture G(-x) at mu = 4, rho = 1.9.
"""

import pathlib
import sys

from fracou.cli import main as cli_main


def main() -> int:
    outdir = pathlib.Path("figure_data")
    outdir.mkdir(exist_ok=True)
    rc = cli_main(["eval", "ml", "--rho", "1.9", "--xmax", "60",
                   "--points", "600", "--out", str(outdir / "ml_rho19.csv")])
    rc |= cli_main(["eval", "gml", "--rho", "1.9", "--mu", "4", "--lam", "1",
                    "--xmax", "30", "--points", "300",
                    "--out", str(outdir / "gml_mu4_rho19.csv")])
    print(f"wrote {outdir}/ml_rho19.csv and {outdir}/gml_mu4_rho19.csv")
    return rc


if __name__ == "__main__":
    sys.exit(main())
