"""Draw the example maps as SVG: the 14-letter necklace word with half-flowers,
a 7-regular ball next to a necklace map of the same size, and a lattice patch."""

import argparse
import os

import numpy as np

from rpm_lab.diagnostics import center_embedding, regular_ball, supported_fraction
from rpm_lab.experiments import sample_unbiased
from rpm_lab.necklace import build_plus, build_rooted
from rpm_lab.render import render_svg
from rpm_lab.uniformize import layout


def necklace_like(n, seed):
    while True:
        word, k = sample_unbiased(n, seed)
        t = build_rooted(word, k)
        if len(t.boundary_vertices) > 2:
            return t
        seed += 1_000_003


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="figures")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    os.makedirs(args.out, exist_ok=True)

    def save(name, svg):
        with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
            fh.write(svg)
        print(os.path.join(args.out, name))

    t = build_plus("BRbRRbBBrrRBRR")
    lay = layout(t)
    interior = np.setdiff1d(np.arange(t.n_vertices), t.boundary_vertices)
    save("necklace_word.svg", render_svg(lay, half_flowers=interior))

    save("lattice.svg", render_svg(layout(regular_ball(6, 4)), half_flowers=[0]))

    ball7 = regular_ball(7, 4)
    neck = necklace_like(ball7.n_faces, args.seed)
    for name, m in (("seven_regular.svg", ball7), ("necklace_same_size.svg", neck)):
        lay = layout(m)
        frac = supported_fraction(center_embedding(m, lay).g, 0.25, 8)
        print(f"  {m.n_faces} faces, supported fraction (0.25, 8) = {frac:.3f}")
        save(name, render_svg(lay, max_radius=50))


if __name__ == "__main__":
    main()
