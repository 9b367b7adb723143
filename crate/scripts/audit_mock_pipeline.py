"""Independent re-implementation of the mock evaluation pipeline.

Recomputes, from the rules alone, what the deterministic mock backend should
answer for every test record of a JSONL dataset, with and without retrieved
context, and prints per-query votes plus accuracy and macro-F1. Used once to
audit the pinned fixture numbers.

    python3 scripts/audit_mock_pipeline.py fixtures/news.jsonl
"""

import json
import math
import sys
from collections import Counter, defaultdict

STOPWORDS = set("""
a an the about above after at before by for from in into of on over through to under with without
and as because but if nor or so than that while yet
he her him his i it its me my our she their them they we you your
""".split())
assert len(STOPWORDS) == 50

NEWS_LABELS = sorted([
    "travel", "education", "parents", "style & beauty", "entertainment", "food & drink",
    "science & technology", "business", "sports", "healthy living", "women", "politics",
    "crime", "culture & arts", "religion",
])
K_USER = K_GLOBAL = 5


def tokens(text):
    out, cur = [], []
    for ch in text.lower() + " ":
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            t = "".join(cur)
            if len(t) >= 2 and t not in STOPWORDS:
                out.append(t)
            cur = []
    return out


def content(r):
    title, text = r["title"].strip(), r["text"].strip()
    if not title:
        return text
    if not text:
        return title
    return f"{title}\n{text}"


class Index:
    def __init__(self, docs):
        self.n = len(docs)
        self.df = Counter()
        for text in docs.values():
            self.df.update(set(tokens(text)))
        self.vec = {i: self.weights(t) for i, t in docs.items()}

    def idf(self, t):
        return math.log((1 + self.n) / (1 + self.df.get(t, 0))) + 1

    def weights(self, text):
        tf = Counter(tokens(text))
        raw = {t: c * self.idf(t) for t, c in sorted(tf.items())}
        norm = math.sqrt(sum(w * w for w in raw.values()))
        return {t: w / norm for t, w in raw.items()} if norm > 0 else raw


def cosine(a, b):
    dot = 0.0
    for t in sorted(a):
        if t in b:
            dot += a[t] * b[t]
    return min(max(dot, 0.0), 1.0)


def top(index, q, pool, k):
    scored = [(cosine(q, index.vec[n["id"]]), n["timestamp"], n["id"], n) for n in pool]
    scored.sort(key=lambda s: (-s[0], -s[1], s[2]))
    return scored[:k]


def vote(hits, labels):
    if not hits:
        return labels[0], {}
    votes = defaultdict(float)
    for score, _, _, n in hits:
        votes[n["category"]] += float(f"{score:.3f}")
    best = None
    for label in sorted(votes):
        if best is None or votes[label] > votes[best]:
            best = label
    return best, dict(votes)


def metrics(pairs):
    acc = sum(g == p for g, p in pairs) / len(pairs)
    labels = sorted({g for g, _ in pairs} | {p for _, p in pairs if p is not None})
    f1s = []
    for l in labels:
        tp = sum(g == l and p == l for g, p in pairs)
        fp = sum(g != l and p == l for g, p in pairs)
        fn = sum(g == l and p != l for g, p in pairs)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    return acc, sum(f1s) / len(f1s)


def main(path):
    records = [json.loads(l) for l in open(path, encoding="utf-8") if l.strip()]
    seq = Counter()
    nodes = []
    for r in records:
        if r["split"] != "history":
            continue
        seq[r["user_id"]] += 1
        doc = r["text"] if not r["title"] else f"{r['title']}\n{r['text']}"
        nodes.append(dict(id=f"i:{r['user_id']}:{seq[r['user_id']]}", user=r["user_id"], doc=doc,
                          category=r["gold"].lower(), timestamp=r["timestamp"]))
    index = Index({n["id"]: n["doc"] for n in nodes})

    counts = Counter(r["user_id"] for r in records if r["split"] == "history")
    users = set(sorted(counts, key=lambda u: (-counts[u], u))[:100])
    per_user = Counter()
    rows = []
    for r in records:
        if r["split"] != "test" or r["user_id"] not in users:
            continue
        per_user[r["user_id"]] += 1
        qid = f"q:{r['user_id']}:{per_user[r['user_id']]:04d}"
        q = index.weights(content(r))
        own = [n for n in nodes if n["user"] == r["user_id"]]
        own.sort(key=lambda n: (n["timestamp"], n["id"]))
        rest = [n for n in nodes if n["user"] != r["user_id"]]
        hits = top(index, q, own, K_USER) + top(index, q, rest, K_GLOBAL)
        full, votes = vote(hits, NEWS_LABELS)
        empty, _ = vote([], NEWS_LABELS)
        rows.append((qid, r["gold"].lower(), full, empty, votes))
    rows.sort()
    for qid, gold, full, empty, votes in rows:
        mark = "ok " if gold == full else "MISS"
        shown = ", ".join(f"{l}={v:.3f}" for l, v in sorted(votes.items(), key=lambda kv: -kv[1]))
        print(f"{mark} {qid} gold={gold!r} full={full!r} empty={empty!r} votes: {shown}")
    full_acc, full_f1 = metrics([(g, f) for _, g, f, _, _ in rows])
    empty_acc, empty_f1 = metrics([(g, e) for _, g, _, e, _ in rows])
    print(f"queries={len(rows)}")
    print(f"full:  accuracy={full_acc:.10f} macro_f1={full_f1:.10f}")
    print(f"empty: accuracy={empty_acc:.10f} macro_f1={empty_f1:.10f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/news.jsonl")
