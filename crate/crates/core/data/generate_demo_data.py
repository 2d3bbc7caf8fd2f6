#!/usr/bin/env python3
"""Regenerates the bundled demo data. Output is deterministic (seed 42).

    python3 crates/core/data/generate_demo_data.py
"""
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

NOUNS = {
    "cat": "kitten", "dog": "puppy", "house": "home", "car": "vehicle",
    "child": "kid", "teacher": "instructor", "garden": "yard", "road": "street",
    "city": "town", "book": "novel", "doctor": "physician", "river": "stream",
    "market": "bazaar", "boat": "ship", "shop": "store", "friend": "companion",
}
ADJS = {
    "big": "large", "small": "little", "quick": "fast", "happy": "glad",
    "old": "ancient", "quiet": "silent", "pretty": "lovely", "angry": "furious",
    "tired": "weary", "cold": "chilly",
}
VERBS_INTRANS = {
    "walked": "strolled", "ran": "sprinted", "waited": "lingered",
    "slept": "rested", "played": "frolicked", "stopped": "paused",
}
VERBS_TRANS = {
    "bought": "purchased", "found": "discovered", "saw": "noticed",
    "liked": "enjoyed", "cleaned": "washed", "visited": "toured",
}
PREPS = {"near": "beside", "behind": "past", "inside": "within", "across": "over"}
ADVS = {
    "quickly": "rapidly", "slowly": "gradually", "today": "now",
    "yesterday": "recently", "again": "once more", "often": "frequently",
}
POSITIVE = {"happy", "pretty", "glad", "lovely", "quiet", "silent"}

ALL = [NOUNS, ADJS, VERBS_INTRANS, VERBS_TRANS, PREPS, ADVS]


def both(table):
    return list(table) + list(table.values())


def sentence(rng, short=False):
    noun = lambda: rng.choice(both(NOUNS))
    adj = lambda: rng.choice(both(ADJS))
    adv = lambda: rng.choice(both(ADVS))
    if short:
        return f"the {noun()} {rng.choice(both(VERBS_INTRANS))} {adv()}"
    t = rng.randrange(3)
    if t == 0:
        return (f"the {adj()} {noun()} {rng.choice(both(VERBS_INTRANS))} "
                f"{rng.choice(both(PREPS))} the {noun()} {adv()}")
    if t == 1:
        return f"a {adj()} {noun()} {rng.choice(both(VERBS_TRANS))} the {adj()} {noun()} {adv()}"
    return f"my {noun()} {rng.choice(both(VERBS_TRANS))} a {adj()} {noun()} in the {noun()}"


def canonical(rng, short=False):
    """Sentences drawn from the base words only, so synonym tables apply."""
    noun = lambda: rng.choice(list(NOUNS))
    adj = lambda: rng.choice(list(ADJS))
    adv = lambda: rng.choice(list(ADVS))
    if short:
        return f"the {noun()} {rng.choice(list(VERBS_INTRANS))} {adv()}"
    t = rng.randrange(3)
    if t == 0:
        return (f"The {adj()} {noun()} {rng.choice(list(VERBS_INTRANS))} "
                f"{rng.choice(list(PREPS))} the {noun()} {adv()}.")
    if t == 1:
        return f"A {adj()} {noun()} {rng.choice(list(VERBS_TRANS))} the {adj()} {noun()} {adv()}."
    return f"My {noun()} {rng.choice(list(VERBS_TRANS))} a {adj()} {noun()} in the {noun()}."


def merge(*tables):
    out = {}
    for t in tables:
        out.update(t)
    return out


def variant(map_=None, reorder="none"):
    v = {"map": map_ or {}}
    if reorder != "none":
        v["reorder"] = reorder
    return v


def main():
    rng = random.Random(42)

    with open(os.path.join(HERE, "lm_corpus.txt"), "w") as f:
        for i in range(1000):
            f.write(sentence(rng, short=(i % 10 == 0)) + " .\n")

    sources = []
    seen = set()
    while len(sources) < 20:
        s = canonical(rng, short=(len(sources) % 7 == 3))
        if s not in seen:
            seen.add(s)
            sources.append(s)
    with open(os.path.join(HERE, "demo_sources.jsonl"), "w") as f:
        for i, s in enumerate(sources):
            f.write(json.dumps({"id": f"s{i:02d}", "text": s}) + "\n")

    verbs = merge(VERBS_INTRANS, VERBS_TRANS)
    lexical_a = merge(NOUNS, verbs)
    lexical_b = merge(ADJS, ADVS, PREPS)
    everything = merge(*ALL)
    pairs = [{
        "src": "en", "tgt": "en",
        "variants": [
            variant(lexical_a),
            variant(lexical_b),
            variant(everything),
            variant(reorder="reverse"),
            variant(reorder="rotate_left"),
        ],
    }]
    backward = {
        "ko": merge(NOUNS),
        "fr": merge(verbs),
        "ja": merge(ADJS),
        "zh": {},
        "de": merge(NOUNS, ADJS),
        "es": merge(verbs, ADVS),
    }
    for pivot, table in backward.items():
        pairs.append({"src": "en", "tgt": pivot, "variants": [variant()]})
        pairs.append({"src": pivot, "tgt": "en", "variants": [variant(table)]})
    with open(os.path.join(HERE, "demo_tables.json"), "w") as f:
        json.dump({"pairs": pairs}, f, indent=1, sort_keys=True)
        f.write("\n")

    identity = [{"src": a, "tgt": b, "variants": [variant()]}
                for a in ["en", "ko", "fr", "ja", "zh", "de", "es"]
                for b in ["en", "ko", "fr", "ja", "zh", "de", "es"]]
    # direct decoding still paraphrases; every round trip returns the source
    identity = [p for p in identity if not (p["src"] == "en" and p["tgt"] == "en")]
    identity.insert(0, pairs[0])
    with open(os.path.join(HERE, "identity_roundtrip_tables.json"), "w") as f:
        json.dump({"pairs": identity}, f, indent=1, sort_keys=True)
        f.write("\n")

    with open(os.path.join(HERE, "labeled_toy.jsonl"), "w") as f:
        texts = set()
        n = 0
        while n < 48:
            s = canonical(rng, short=(n % 9 == 4))
            if s in texts:
                continue
            texts.add(s)
            words = set(s.lower().rstrip(".").split())
            label = "positive" if words & POSITIVE else "negative"
            f.write(json.dumps({"id": f"ex{n:02d}", "text": s, "label": label}) + "\n")
            n += 1
        # single words: every candidate equals the source
        f.write(json.dumps({"id": "ex48", "text": "Okay", "label": "positive"}) + "\n")
        f.write(json.dumps({"id": "ex49", "text": "thanks", "label": "negative"}) + "\n")


if __name__ == "__main__":
    main()
