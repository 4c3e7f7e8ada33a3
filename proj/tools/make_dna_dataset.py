#!/usr/bin/env python3
# Copyright 2026 The lcnn Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the 180-feature `dna` LIBSVM files from the UCI splice-junction data.

The StatLog `dna` set is the UCI primate splice-junction sequences with the
four records containing D/R/S codes removed and every nucleotide one-hot
coded into three binary features (A=100, C=010, G=001, T=000, N=000).
Classes: 1 = EI, 2 = IE, 3 = neither.

The raw splice file ships inside the `keel-ds` wheel on PyPI, so no network
access beyond a package index is needed:

    pip download --no-deps keel-ds -d /tmp/keel
    python3 tools/make_dna_dataset.py --wheel /tmp/keel/keel_ds-*.whl --out data/dna

Output: dna.scale.tr (1400), dna.scale.val (600), dna.scale.t (1186).
"""

import argparse
import glob
import random
import sys
import zipfile
from pathlib import Path

SPLICE_MEMBER = "keel_ds/data/balanced/raw/splice.dat"
CODE = {"A": (1, 0, 0), "C": (0, 1, 0), "G": (0, 0, 1), "T": (0, 0, 0), "N": (0, 0, 0)}
LABEL = {"EI": 1, "IE": 2, "N": 3}
SIZES = (("dna.scale.tr", 1400), ("dna.scale.val", 600), ("dna.scale.t", 1186))


def read_splice(args):
    if args.splice:
        return Path(args.splice).read_text()
    wheels = glob.glob(args.wheel)
    if not wheels:
        sys.exit(f"no wheel matches {args.wheel}")
    with zipfile.ZipFile(wheels[0]) as z:
        return z.read(SPLICE_MEMBER).decode()


def encode(row):
    *bases, cls = [t.strip() for t in row.split(",")]
    feats = []
    for i, b in enumerate(bases):
        for k, bit in enumerate(CODE[b]):
            if bit:
                feats.append(f"{3 * i + k + 1}:1")
    return f"{LABEL[cls]} " + " ".join(feats)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel", default="/tmp/keel/keel_ds-*.whl")
    ap.add_argument("--splice", help="path to an already extracted splice.dat")
    ap.add_argument("--out", default="data/dna")
    ap.add_argument("--seed", type=int, default=20170523)
    args = ap.parse_args()

    rows = [r for r in read_splice(args).splitlines() if r.strip()]
    rows = [r for r in rows if all(t.strip() in CODE for t in r.split(",")[:-1])]
    if len(rows) != sum(n for _, n in SIZES):
        sys.exit(f"expected 3186 usable records, got {len(rows)}")

    lines = [encode(r) for r in rows]
    random.Random(args.seed).shuffle(lines)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = 0
    for name, n in SIZES:
        (out / name).write_text("\n".join(lines[start:start + n]) + "\n")
        start += n
        print(f"{out / name}: {n} rows")


if __name__ == "__main__":
    main()
