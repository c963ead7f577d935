"""Classify random measure-preserving forms and perturbations of them.

    python3 scripts/random_forms.py --count 500 --seed 1
"""
import argparse
import collections
import time

import numpy as np

from halfplane_iso.classify import classify
from halfplane_iso.generators import perturbed_forms, random_form


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    start = time.perf_counter()
    clean = collections.Counter(classify(random_form(rng).to_map()).verdict.value for _ in range(args.count))
    bent = collections.Counter(classify(r).verdict.value for r in perturbed_forms(rng, args.count))
    print(f"{args.count} forms:        {dict(clean)}")
    print(f"{args.count} perturbations: {dict(bent)}")
    print(f"{time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
