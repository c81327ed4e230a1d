"""Brute-force ROUGE-N recall written without the package's helpers."""

import itertools


def ngrams(seq, n):
    return [tuple(seq[i:i + n]) for i in range(len(seq) - n + 1)]


def count(items):
    out = {}
    for x in items:
        out[x] = out.get(x, 0) + 1
    return out


def recall_one(cand_counts, ref, n):
    grams = ngrams(ref, n)
    if not grams:
        return None
    matched = 0
    for g, c in count(grams).items():
        matched += min(c, cand_counts.get(g, 0))
    return matched / len(grams)


def recall(cand, refs, n):
    cc = count(ngrams(cand, n))
    vals = [r for r in (recall_one(cc, ref, n) for ref in refs) if r is not None]
    return sum(vals) / len(vals) if vals else None


def all_sequences(alphabet, max_len):
    for length in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=length)


def canonical(seq):
    """Relabel symbols in order of first appearance."""
    names = {}
    return tuple(names.setdefault(x, len(names)) for x in seq)
