#!/usr/bin/env python3
"""Reference modified Kneser-Ney probabilities for two tiny corpora.

Written independently of the C++ code, straight from the estimator's
definition, using exact fractions. Writes mkn_oracle.json next to this file.
"""
import itertools
import json
from collections import Counter, defaultdict
from fractions import Fraction
from pathlib import Path

BOS, EOS, UNK = "<s>", "</s>", "<unk>"

CORPORA = {
    "bigram_6": {"order": 2, "sentences": ["a b a b a c"]},
    "trigram_30": {
        "order": 3,
        "sentences": [
            "the cat sat on the mat",
            "the dog sat on the log",
            "a cat saw the dog",
            "the cat saw a dog on the mat",
            "a dog sat",
        ],
    },
}


def events(sentences, n):
    for s in sentences:
        words = s.split()
        padded = [BOS] * (n - 1) + words + [EOS]
        for i in range(n - 1, len(padded)):
            yield tuple(padded[i - n + 1 : i + 1])


def discounts(counts):
    coc = Counter(c for c in counts.values() if 1 <= c <= 4)
    n1, n2, n3, n4 = (Fraction(coc[i]) for i in (1, 2, 3, 4))
    d = [Fraction(1, 2), Fraction(1), Fraction(3, 2)]
    if n1 + 2 * n2 > 0:
        y = n1 / (n1 + 2 * n2)
        if n1 > 0:
            d[0] = 1 - 2 * y * n2 / n1
        if n2 > 0:
            d[1] = 2 - 3 * y * n3 / n2
        if n3 > 0:
            d[2] = 3 - 4 * y * n4 / n3
    return [min(max(x, Fraction(0)), Fraction(m + 1)) for m, x in enumerate(d)]


def build(sentences, n):
    vocab = [UNK, EOS] + sorted({w for s in sentences for w in s.split()})
    level = {n: Counter(events(sentences, n))}
    for k in range(n - 1, 0, -1):
        left = defaultdict(set)
        for g in level[k + 1]:
            left[g[1:]].add(g[0])
        level[k] = Counter({g: len(v) for g, v in left.items()})
    disc = {k: discounts(level[k]) for k in level}
    ctx = {k: defaultdict(lambda: [0, 0, 0, 0]) for k in level}  # total, N1, N2, N3+
    for k, counts in level.items():
        for g, c in counts.items():
            st = ctx[k][g[:-1]]
            st[0] += c
            st[min(c, 3)] += 1

    def prob(history, w):
        p = Fraction(1, len(vocab))
        for k in range(1, n + 1):
            u = tuple(history[len(history) - (k - 1) :]) if k > 1 else ()
            if u not in ctx[k]:
                continue
            total, t1, t2, t3 = ctx[k][u]
            d = disc[k]
            c = level[k].get(u + (w,), 0)
            alpha = max(Fraction(c) - d[min(c, 3) - 1], Fraction(0)) if c else Fraction(0)
            gamma = (d[0] * t1 + d[1] * t2 + d[2] * t3) / total
            p = alpha / total + gamma * p
        return p

    return vocab, level, disc, prob


def main():
    out = {}
    for name, spec in CORPORA.items():
        n = spec["order"]
        vocab, level, disc, prob = build(spec["sentences"], n)
        histories = sorted({g[:-1] for g in level[n]})
        # plus one unseen context per order to exercise back-off
        histories.append(tuple(["zzz"] * (n - 1)))
        probs = []
        for h in histories:
            row = {w: float(prob(h, w)) for w in vocab}
            assert sum(prob(h, w) for w in vocab) == 1
            probs.append({"context": list(h), "probs": row})
        out[name] = {
            "order": n,
            "sentences": spec["sentences"],
            "discounts": {str(k): [float(x) for x in disc[k]] for k in sorted(disc)},
            "continuation": {" ".join(g): c for g, c in sorted(level[1].items())},
            "queries": probs,
        }
    # The "b" bigram after "a" in the six-token corpus, spelled out.
    out["bigram_6"]["p_b_given_a"] = float(build(CORPORA["bigram_6"]["sentences"], 2)[3](("a",), "b"))
    path = Path(__file__).with_name("mkn_oracle.json")
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
