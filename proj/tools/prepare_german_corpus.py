#!/usr/bin/env python3
"""Build the German test corpora and a compound segmentation dictionary.

Inputs are the sentence dumps of the `de-corpus` npm package (builds/doc-*.json,
MIT) and a ParlSpeech Bundestag CSV sample (column "text"). Output is one
sentence per line, lowercased and tokenised, plus a TSV dictionary of
`word<TAB>seg seg ...` lines where linking elements are written `+s`.

Compounds are found with a frequency splitter: a word splits into known
words (optionally joined by a linker) when the geometric mean of the part
frequencies beats the frequency of the whole word.
"""

import argparse
import csv
import glob
import json
import math
import os
import re
import sys
from collections import Counter

TOKEN = re.compile(r"[^\W\d_]+(?:-[^\W\d_]+)*|\d+(?:[.,]\d+)*|[.,;:!?()\"]")
LINKERS = ("es", "en", "er", "s", "n", "e")
MIN_PART = 4
MIN_PART_FREQ = 3


def tokenise(text):
    return TOKEN.findall(text.lower().replace("’", "'"))


def read_de_corpus(root):
    out = []
    for path in sorted(glob.glob(os.path.join(root, "doc-*.json")), key=lambda p: int(re.findall(r"\d+", p)[-1])):
        with open(path, encoding="utf-8") as f:
            out.extend(text for text, _ in json.load(f))
    return out


def read_parlspeech(path):
    csv.field_size_limit(sys.maxsize)
    with open(path, encoding="utf-8", newline="") as f:
        speeches = [row["text"] for row in csv.DictReader(f)]
    # speeches are pre-tokenised with spaces; cut them at sentence punctuation
    out = []
    for s in speeches:
        out.extend(p for p in re.split(r"(?<= [.!?]) ", s) if p.strip())
    return out


def best_split(word, freq, depth=0):
    """Parts of `word` as (text, is_linker) pairs, or None if it stays whole."""
    best, best_score = None, freq.get(word, 0)
    for i in range(MIN_PART, len(word) - MIN_PART + 1):
        head = word[i:]
        if freq.get(head, 0) < MIN_PART_FREQ:
            continue
        left = word[:i]
        candidates = [(left, None)]
        candidates += [(left[: -len(l)], l) for l in LINKERS if left.endswith(l) and len(left) - len(l) >= MIN_PART]
        for mod, linker in candidates:
            if freq.get(mod, 0) >= MIN_PART_FREQ:
                mod_parts = [(mod, False)]
            elif depth < 2:
                mod_parts = best_split(mod, freq, depth + 1)
                if mod_parts is None:
                    continue
            else:
                continue
            parts = mod_parts + ([(linker, True)] if linker else []) + [(head, False)]
            words = [p for p, is_linker in parts if not is_linker]
            score = math.exp(sum(math.log(freq.get(p, 1)) for p in words) / len(words))
            if score > best_score:
                best, best_score = parts, score
    return best


def segment(vocabulary, freq):
    entries = {}
    for w in sorted(vocabulary):
        if "-" in w or len(w) < 2 * MIN_PART:
            continue
        parts = best_split(w, freq)
        if parts:
            entries[w] = " ".join(("+" + p) if is_linker else p for p, is_linker in parts)
    return entries


def write_lines(path, sentences):
    with open(path, "w", encoding="utf-8") as f:
        for s in sentences:
            f.write(" ".join(s) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--de-corpus", required=True, help="directory with doc-*.json")
    ap.add_argument("--parlspeech", required=True, help="ParlSpeech CSV")
    ap.add_argument("--out", required=True)
    ap.add_argument("--small-tokens", type=int, default=100_000)
    ap.add_argument("--test-every", type=int, default=50)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    big = [t for t in (tokenise(s) for s in read_de_corpus(args.de_corpus)) if t]
    train = [s for i, s in enumerate(big) if i % args.test_every != args.test_every - 1]
    test = [s for i, s in enumerate(big) if i % args.test_every == args.test_every - 1]
    write_lines(os.path.join(args.out, "de_large.train.txt"), train)
    write_lines(os.path.join(args.out, "de_large.test.txt"), test)

    freq = Counter(w for s in train for w in s)
    entries = segment(freq, freq)
    with open(os.path.join(args.out, "de_large.seg.tsv"), "w", encoding="utf-8") as f:
        f.write("# word\tsegments (linking elements prefixed with +)\n")
        for w, seg in entries.items():
            f.write(f"{w}\t{seg}\n")

    small, n = [], 0
    for s in (tokenise(x) for x in read_parlspeech(args.parlspeech)):
        if not s:
            continue
        if n >= args.small_tokens:
            break
        small.append(s)
        n += len(s)
    write_lines(os.path.join(args.out, "de_small.txt"), small)

    print(f"large: {len(train)} train sentences / {sum(map(len, train))} tokens, "
          f"{len(test)} test sentences / {sum(map(len, test))} tokens, {len(entries)} compounds")
    print(f"small: {len(small)} sentences / {n} tokens")


if __name__ == "__main__":
    main()
