"""Regenerate the bundled toy embedding table.

The table is tiny and synthetic: each topical word sits near one axis of a
12-dimensional space (eco, health, or one of several generic topics) plus
seeded noise, so cause relevance behaves predictably in tests and demos.

    python3 scripts/make_toy_embeddings.py > src/causecommit/data/toy_embeddings.txt
"""

import sys

import numpy as np

DIM = 12
SEED = 20170901

ECO = (
    "environment ecosystem biodiversity habitats climate ecology plantlife pollution "
    "rainforests trees planting conservation conserve recycle recycling renewable "
    "energy solar wind wildlife forests sustainable green earth earthday planet "
    "emissions carbon coral reef reefs river oceans fisheries habitat nature protect "
    "epa cleanwateract waterways landscape species"
).split()
HEALTH = (
    "healthy nutritious lowfat wholesome organic natural vegan nutrition foods diet "
    "veggies vegetables recipes fruit protein vitamins fitness exercise nongmo "
    "certified calories fiber salad hospital doctors wellness eat snack"
).split()
GENERIC = {
    2: "happy great love party birthday friends fun awesome smile celebrate".split(),
    3: "pizza coffee burger fries dessert dinner lunch breakfast tasty cheese".split(),
    4: "football game team win season fans play sports score match".split(),
    5: "music movie show concert tonight tomorrow today weekend week month".split(),
    6: "sale deal shop store new products package price buy order".split(),
    7: "bill legislation introduce introduced voted vote senate sen congress law".split(),
    8: "tourism economy jobs business market money tax growth industry workers".split(),
    9: "thanks thank hi regards special check out stunning photo meeting".split(),
    10: "i we you they he she our my your their us me them it".split(),
    11: "the a and to of for in on with is are was this that not no all more".split(),
}
# Words deliberately between two topics.
MIXED = {
    "water": (0, 1, 0.7),
    "drinking": (0, 3, 0.6),
    "food": (1, 3, 0.8),
    "farm": (0, 1, 0.8),
    "staff": (7, 9, 1.0),
}


def build(rng):
    rows = []
    for axis, words in ((0, ECO), (1, HEALTH)):
        for w in words:
            v = rng.normal(0.0, 0.12, DIM)
            v[axis] += 1.0
            rows.append((w, v))
    for axis, words in GENERIC.items():
        for w in words:
            v = rng.normal(0.0, 0.12, DIM)
            v[axis] += 1.0
            v[0] *= 0.3
            v[1] *= 0.3
            rows.append((w, v))
    for w, (a, b, mix) in MIXED.items():
        v = rng.normal(0.0, 0.1, DIM)
        v[a] += 1.0
        v[b] += mix
        rows.append((w, v))
    return rows


def main(out=sys.stdout):
    rng = np.random.default_rng(SEED)
    rows = build(rng)
    out.write(f"{len(rows)} {DIM}\n")
    for w, v in rows:
        out.write(w + " " + " ".join(f"{x:.4f}" for x in v) + "\n")


if __name__ == "__main__":
    main()
