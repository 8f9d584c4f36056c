#!/usr/bin/env python3
"""Download the benchmark datasets into ./data (network required).

mushrooms and w8a come from the LIBSVM binary collection; magic04 comes
from the UCI repository and is converted here (g -> +1, h -> -1) into
libsvm format. The package itself never downloads anything; this helper
exists so the dataset-gated acceptance tests can run.
"""

import sys
import urllib.request
from pathlib import Path

LIBSVM_BASE = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary"
MAGIC_URL = ("https://archive.ics.uci.edu/ml/machine-learning-databases/"
             "magic/magic04.data")

EXPECTED_SIZES = {"mushrooms": 8124, "w8a": 49749, "magic04": 19020}


def fetch(url: str) -> str:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read().decode("utf-8")


def convert_magic(text: str) -> str:
    lines = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        cells = line.split(",")
        label = {"g": "+1", "h": "-1"}[cells[-1]]
        feats = " ".join(f"{j + 1}:{v}" for j, v in enumerate(cells[:-1])
                         if float(v) != 0.0)
        lines.append(f"{label} {feats}".rstrip())
    return "\n".join(lines) + "\n"


def main() -> int:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else \
        Path(__file__).resolve().parent.parent / "data"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in ("mushrooms", "w8a"):
        target = out_dir / f"{name}.libsvm"
        if target.exists():
            print(f"{target} already present")
            continue
        target.write_text(fetch(f"{LIBSVM_BASE}/{name}"))
    target = out_dir / "magic04.libsvm"
    if not target.exists():
        target.write_text(convert_magic(fetch(MAGIC_URL)))
    else:
        print(f"{target} already present")
    for name, expected in EXPECTED_SIZES.items():
        path = out_dir / f"{name}.libsvm"
        count = sum(1 for ln in path.read_text().splitlines() if ln.strip())
        status = "ok" if count == expected else f"EXPECTED {expected}"
        print(f"{path}: {count} examples ({status})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
