"""Generate fixtures/news.jsonl: a small synthetic news-categorization set.

20 users, each with a time-ordered history and a few held-out test
articles. Every user leans towards two or three categories; a few test
articles fall outside the user's usual mix so that other users' history
is the only useful evidence. Output is deterministic for a fixed seed.
"""

import json
import random
import sys
from pathlib import Path

SEED = 7
N_USERS = 20

TOPICS = {
    "politics": {
        "words": ["senate", "vote", "bill", "election", "campaign", "congress", "governor", "ballot", "policy", "lawmakers"],
        "names": ["Senate", "White House", "Capitol Hill", "Supreme Court"],
    },
    "sports": {
        "words": ["match", "goal", "season", "coach", "league", "playoff", "striker", "tournament", "score", "championship"],
        "names": ["Premier League", "World Cup", "Olympics", "Super Bowl"],
    },
    "food & drink": {
        "words": ["recipe", "kitchen", "chef", "flavor", "bake", "dinner", "sauce", "wine", "restaurant", "spices"],
        "names": ["Michelin", "Napa Valley", "Julia Child"],
    },
    "travel": {
        "words": ["flight", "hotel", "beach", "passport", "itinerary", "airport", "island", "resort", "luggage", "tourists"],
        "names": ["Lonely Planet", "Bali", "Iceland", "Grand Canyon"],
    },
    "science & technology": {
        "words": ["software", "robot", "research", "laboratory", "algorithm", "satellite", "quantum", "startup", "data", "physics"],
        "names": ["Silicon Valley", "NASA", "Mars Rover"],
    },
    "business": {
        "words": ["market", "stocks", "earnings", "investors", "merger", "revenue", "profit", "shares", "economy", "quarterly"],
        "names": ["Wall Street", "Federal Reserve", "Dow Jones"],
    },
    "entertainment": {
        "words": ["movie", "album", "celebrity", "premiere", "concert", "actor", "streaming", "festival", "sitcom", "box office"],
        "names": ["Hollywood", "Grammy Awards", "Netflix"],
    },
    "women": {
        "words": ["equality", "feminist", "mothers", "workplace", "harassment", "leadership", "gender", "daughters", "activists", "rights"],
        "names": ["Teen Vogue", "Women's March", "Title IX"],
    },
}

SHARED = ["report", "week", "new", "people", "today", "story", "latest", "city", "year", "plan"]


def article(rng, topic, noise_topic=None):
    spec = TOPICS[topic]
    name = rng.choice(spec["names"])
    words = rng.sample(spec["words"], 2)
    if noise_topic is not None:
        words += rng.sample(TOPICS[noise_topic]["words"], rng.choice([1, 2, 3]))
    words += rng.sample(SHARED, 3)
    rng.shuffle(words)
    title = f"{name} {words[0]} {words[1]}"
    mention = name if noise_topic is None or rng.random() < 0.5 else rng.choice(TOPICS[noise_topic]["names"])
    text = f"A {' '.join(words[2:])} story about {mention}."
    return title, text


def main(out):
    rng = random.Random(SEED)
    labels = sorted(TOPICS)
    records = []
    ts = 1_700_000_000
    for u in range(N_USERS):
        user = f"u{u:02d}"
        favorites = rng.sample(labels, rng.choice([2, 3]))
        weights = [rng.randint(2, 5) for _ in favorites]
        n_history = rng.randint(6, 14)
        for _ in range(n_history):
            topic = rng.choices(favorites, weights)[0]
            noise = rng.choice(labels) if rng.random() < 0.5 else None
            title, text = article(rng, topic, noise)
            ts += rng.randint(60, 3600)
            records.append(dict(user_id=user, title=title, text=text, gold=topic, timestamp=ts, split="history"))
        for t in range(3):
            # the last test article of every fourth user comes from outside the user's mix
            if t == 2 and u % 4 == 0:
                topic = rng.choice([l for l in labels if l not in favorites])
            else:
                topic = rng.choices(favorites, weights)[0]
            noise = rng.choice(labels) if rng.random() < 0.5 else None
            title, text = article(rng, topic, noise)
            ts += rng.randint(60, 3600)
            records.append(dict(user_id=user, title=title, text=text, gold=topic, timestamp=ts, split="test"))
    records.sort(key=lambda r: (r["timestamp"], r["user_id"]))
    with open(out, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures/news.jsonl"))
