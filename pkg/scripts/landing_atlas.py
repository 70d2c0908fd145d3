#!/usr/bin/env python3
"""Landing atlas: land every periodic ray up to a period bound and
match the landings against an independent Newton orbit search.

For a fixed kappa this enumerates the periodic addresses with periods
up to --max-period and entries bounded by --M, chases each ray down to
its landing point, searches the box for periodic orbits by Newton
iteration from a seed grid, and reports which orbits are covered by
which rays.  Artifacts: a JSON atlas and a dynamical-plane PNG with the
landed rays overlaid.

Example:
    python3 scripts/landing_atlas.py --kappa="-2+0i" --max-period=2 \
        --M=1 --out-dir=out/atlas
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from exporay import (
    Rect,
    enumerate_periodic,
    render_dynamical,
    save_png,
    sort_lex,
    verify_theorem2,
)


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappa", default="-2+0i")
    ap.add_argument("--max-period", type=int, default=2)
    ap.add_argument("--M", type=int, default=1)
    ap.add_argument("--rect", default="-6:6:-10:10",
                    help="orbit search box and render frame")
    ap.add_argument("--width", type=int, default=900)
    ap.add_argument("--height", type=int, default=700)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out-dir", default="out/atlas")
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    kappa = complex(args.kappa.replace("i", "j"))
    rect = Rect.parse(args.rect)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    reports = []
    for n in range(1, args.max_period + 1):
        rep = verify_theorem2(kappa, n, rect, args.M, threads=args.threads)
        tally = rep.cases[-1]
        print(f"period {n}: verdict={rep.verdict} orbits={tally['orbits_found']}"
              f" covered={tally['covered']}"
              f" uncovered_repelling={tally['uncovered_repelling']}")
        reports.append(rep)

    addresses = sort_lex(list({
        s for n in range(1, args.max_period + 1)
        for s in enumerate_periodic(n, args.M)
    }))
    rgb, meta = render_dynamical(
        kappa, rect, (args.width, args.height),
        overlays=addresses, t_lo=0.02, samples=300,
    )
    png = out / "atlas.png"
    save_png(rgb, png)

    atlas = {
        "kappa": [kappa.real, kappa.imag],
        "max_period": args.max_period,
        "entry_bound": args.M,
        "rays": len(addresses),
        "reports": [rep.as_dict() for rep in reports],
        "render": meta,
        "wall_time": time.perf_counter() - t0,
    }
    doc = out / "atlas.json"
    doc.write_text(json.dumps(atlas, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    print(f"wrote {png} and {doc} in {atlas['wall_time']:.1f}s")
    return 0 if all(r.verdict == "pass" for r in reports) else 3


if __name__ == "__main__":
    sys.exit(main())
