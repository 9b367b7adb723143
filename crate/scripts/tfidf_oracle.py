"""Brute-force TF-IDF oracle.

Writes fixtures/tfidf_oracle.json: the 3-document reference corpus plus 50
random corpora, each with per-document weights, query weights (including
out-of-vocabulary terms) and query/document cosines. Computed with plain
dictionaries and math.log, independent of the Rust code.
"""

import json
import math
import random
import sys
from collections import Counter

STOPWORDS = set("""
a an the about above after at before by for from in into of on over through to under with without
and as because but if nor or so than that while yet
he her him his i it its me my our she their them they we you your
""".split())

VOCAB = ("apple banana cherry delta echo falcon garden harbor island jungle kettle lemon meadow nectar "
         "orbit pepper quartz river saddle timber umbra valley walnut xenon yarrow zephyr amber basil cedar dune").split()
EXTRA = ["The", "of", "I", "x", "Apple,", "BANANA!", "durian", "42"]


def tokens(text):
    out = []
    for raw in "".join(c if c.isalnum() else " " for c in text.lower()).split():
        if len(raw) >= 2 and raw not in STOPWORDS:
            out.append(raw)
    return out


def weights(text, n, df):
    tf = Counter(tokens(text))
    raw = {t: c * (math.log((1 + n) / (1 + df.get(t, 0))) + 1) for t, c in tf.items()}
    norm = math.sqrt(sum(w * w for w in raw.values()))
    return {t: w / norm for t, w in raw.items()} if norm else {}


def cosine(a, b):
    return min(1.0, max(0.0, sum(a[t] * b[t] for t in a if t in b)))


def case(docs, queries):
    n = len(docs)
    df = Counter()
    for _, text in docs:
        df.update(set(tokens(text)))
    dvec = {i: weights(t, n, df) for i, t in docs}
    idf = {t: math.log((1 + n) / (1 + c)) + 1 for t, c in sorted(df.items())}
    qs = []
    for q in queries:
        qv = weights(q, n, df)
        qs.append({"text": q, "weights": qv, "cosines": {i: cosine(qv, dvec[i]) for i, _ in docs}})
    return {
        "docs": [{"id": i, "text": t} for i, t in docs],
        "idf": idf,
        "doc_weights": dvec,
        "queries": qs,
    }


def random_case(rng):
    vocab = VOCAB[: rng.randint(1, 30)]
    docs = []
    for d in range(rng.randint(1, 50)):
        words = [rng.choice(vocab) for _ in range(rng.randint(1, 10))]
        if rng.random() < 0.3:
            words.append(rng.choice(EXTRA))
        docs.append((f"d{d}", " ".join(words)))
    queries = [" ".join(rng.choice(vocab + EXTRA) for _ in range(rng.randint(1, 6))) for _ in range(3)]
    return case(docs, queries)


def main(out):
    rng = random.Random(20240601)
    fixed = case(
        [("d1", "apple banana"), ("d2", "apple apple cherry"), ("d3", "banana")],
        ["apple cherry", "apple durian", "the of"],
    )
    doc = {"fixed": fixed, "random": [random_case(rng) for _ in range(50)]}
    with open(out, "w", encoding="utf-8") as f:
        json.dump(doc, f, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/tfidf_oracle.json")
