#!/usr/bin/env python3
"""Regenerates the toy corpora under data/. Output is deterministic."""

import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "data"

DET = ["a", "the", "a", "two", "some"]
ADJ = ["small", "large", "red", "white", "black", "young", "old", "wooden", "busy", "empty"]
NOUN = ["man", "woman", "dog", "cat", "bus", "train", "plate", "table", "kite", "horse",
        "bicycle", "child", "pizza", "bench", "truck", "bird", "street", "kitchen", "field", "beach"]
VERB = ["sitting", "standing", "walking", "parked", "eating", "flying", "riding", "lying", "playing", "waiting"]
PREP = ["on", "in", "near", "next to", "under", "behind", "across"]
PLACE = ["the street", "a field", "the beach", "a table", "the kitchen", "a bench", "the grass",
         "a city street", "the water", "a wooden table"]

# toy source language for the translation pairs
LEX = {w: w[::-1] + "o" for w in set(DET + ADJ + NOUN + VERB + " ".join(PREP + PLACE).split())}


def caption(rng):
    parts = [rng.choice(DET)]
    if rng.random() < 0.6:
        parts.append(rng.choice(ADJ))
    parts.append(rng.choice(NOUN))
    if rng.random() < 0.8:
        parts.append(rng.choice(["is", "are"]) if rng.random() < 0.3 else "")
        parts.append(rng.choice(VERB))
    parts.append(rng.choice(PREP))
    parts.append(rng.choice(PLACE))
    if rng.random() < 0.25:
        parts += ["with", rng.choice(DET), rng.choice(NOUN)]
    text = " ".join(p for p in parts if p)
    return text[0].upper() + text[1:] + " ."


def write(path, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in lines))


def main():
    rng = random.Random(20210301)
    write(ROOT / "coco-mini" / "corpus.txt", [caption(rng) for _ in range(500)])
    write(ROOT / "coco-tiny" / "corpus.txt", [caption(rng) for _ in range(50)])

    def pair():
        tgt = caption(rng).lower()
        src = " ".join(LEX.get(w, w) for w in tgt.split())
        return src, tgt

    for split, n in [("train", 200), ("valid", 20), ("test", 20)]:
        pairs = [pair() for _ in range(n)]
        write(ROOT / "iwslt-mini" / f"{split}.src", [s for s, _ in pairs])
        write(ROOT / "iwslt-mini" / f"{split}.tgt", [t for _, t in pairs])

    srcs, tgts = [], []
    for _ in range(150):
        first, second = caption(rng).lower(), caption(rng).lower()
        srcs.append(first[:-2] + " while " + second)
        words = [w for w in first.split() if w not in {"a", "the", "some", "is", "are", "."}]
        tgts.append(" ".join(words))
    write(ROOT / "gigaword-mini" / "corpus.src", srcs)
    write(ROOT / "gigaword-mini" / "corpus.tgt", tgts)


if __name__ == "__main__":
    main()
