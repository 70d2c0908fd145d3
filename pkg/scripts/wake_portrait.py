#!/usr/bin/env python3
"""Wake portrait: characteristic rays, root, and persistence probes for
one hyperbolic component.

Starting from a parameter inside a component of the given period, this
finds the component's root and the two characteristic parameter rays
bounding its wake, runs the wake-persistence experiment on probes along
the segment from the root into the component, and renders the
surrounding parameter plane with both characteristic rays overlaid.

Example:
    python3 scripts/wake_portrait.py --sample="1.5+3.14159i" --period=2 \
        --out-dir=out/wake
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from exporay import (
    Rect,
    find_characteristic_rays,
    render_parameter,
    save_png,
    verify_wake_persistence,
)


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sample", default="1.5+3.141592653589793i",
                    help="parameter inside the component")
    ap.add_argument("--period", type=int, default=2)
    ap.add_argument("--m-max", type=int, default=3,
                    help="entry bound for the characteristic-ray search")
    ap.add_argument("--margin", type=float, default=3.0,
                    help="render margin around root and sample")
    ap.add_argument("--width", type=int, default=900)
    ap.add_argument("--height", type=int, default=700)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out-dir", default="out/wake")
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    sample = complex(args.sample.replace("i", "j"))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    wake = find_characteristic_rays(sample, args.period, m_max=args.m_max,
                                    threads=args.threads)
    root = wake.root.kappa
    print(f"root {root:.12g}; characteristic addresses "
          f"{[str(s) for s in wake.char_addresses]}")

    probes = [root + (sample - root) * f for f in (0.2, 0.4, 0.6, 0.8, 1.0)]
    rep = verify_wake_persistence(wake, probes, wake.char_addresses,
                                  threads=args.threads)
    print(rep.text_summary())

    m = args.margin
    rect = Rect(
        min(root.real, sample.real) - m, max(root.real, sample.real) + m,
        min(root.imag, sample.imag) - m, max(root.imag, sample.imag) + m,
    )
    rgb, meta = render_parameter(
        rect, (args.width, args.height), overlays=wake.char_addresses,
        steps=60, threads=args.threads,
    )
    png = out / "wake.png"
    save_png(rgb, png)

    portrait = {
        "sample": [sample.real, sample.imag],
        "period": args.period,
        "root": [root.real, root.imag],
        "char_addresses": [str(s) for s in wake.char_addresses],
        "persistence": rep.as_dict(),
        "render": meta,
        "wall_time": time.perf_counter() - t0,
    }
    doc = out / "wake.json"
    doc.write_text(json.dumps(portrait, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    print(f"wrote {png} and {doc} in {portrait['wall_time']:.1f}s")
    return rep.exit_code()


if __name__ == "__main__":
    sys.exit(main())
