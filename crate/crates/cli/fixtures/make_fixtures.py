"""Regenerates the synthetic fixture corpus and its side files.

Each record has a latent difficulty d in [0, 1]. Harder records get summaries
that overlap less with the reference, lower token probabilities, more varied
samples, more ensemble disagreement, and embeddings further from the training
cloud, so the shipped PRR tables have some structure.

    python3 make_fixtures.py    # writes into this directory
"""

import json
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
N = 24
DIM = 6
MEMBERS = 3
# leading directions carry most training variance, so RDE keeps fewer than DIM
TRAIN_SCALES = [1.0, 0.8, 0.6, 0.4, 0.1, 0.05]
SAMPLES = 4
VOCAB = [
    "council", "budget", "river", "school", "storm", "market", "vote", "bridge", "team", "season",
    "report", "police", "farm", "price", "health", "court", "rail", "museum", "festival", "energy",
    "approved", "delayed", "rose", "fell", "opened", "closed", "warned", "won", "lost", "planned",
    "the", "a", "new", "local", "record", "after", "before", "city", "state", "year",
]

rng = random.Random(7)


def words(n):
    return [rng.choice(VOCAB) for _ in range(n)]


def perturb(tokens, rate):
    return [rng.choice(VOCAB) if rng.random() < rate else t for t in tokens]


def softmax(xs):
    m = max(xs)
    e = [math.exp(x - m) for x in xs]
    s = sum(e)
    return [v / s for v in e]


def rounded(xs, k=6):
    return [round(x, k) for x in xs]


def distribution(peak, width):
    # peak probability on the first of `width` listed tokens, rest spread, tail last
    rest = (1.0 - peak) * 0.8
    tail = 1.0 - peak - rest
    probs = [peak] + [rest / (width - 1)] * (width - 1) + [tail]
    probs = rounded(probs, 6)
    probs[-1] = round(1.0 - sum(probs[:-1]), 6)
    return probs


def make_record(i):
    d = (i + 0.5) / N
    d = min(1.0, max(0.0, d + rng.uniform(-0.15, 0.15)))
    doc = words(30)
    reference = doc[2:10]
    greedy = perturb(reference, 0.1 + 0.6 * d)
    length = len(greedy)

    probs = [min(0.99, max(0.05, rng.gauss(0.85 - 0.5 * d, 0.08))) for _ in range(length)]
    logprobs = rounded([math.log(p) for p in probs])
    entropies = rounded([max(0.0, -p * math.log(p) - (1 - p) * math.log((1 - p) / 5)) for p in probs])

    samples = []
    for _ in range(SAMPLES):
        toks = perturb(greedy, 0.05 + 0.7 * d)
        lp = [math.log(min(0.99, max(0.02, rng.gauss(0.8 - 0.5 * d, 0.1)))) for _ in toks]
        seq = sum(lp)
        members = [seq + rng.gauss(0.0, 0.2 + 3.0 * d) for _ in range(MEMBERS)]
        samples.append({
            "text": " ".join(toks),
            "token_logprobs": rounded(lp),
            "ensemble_seq_logprobs": rounded(members),
        })

    positions = []
    for t in range(length):
        member_probs = []
        for _ in range(MEMBERS):
            peak = min(0.97, max(0.1, probs[t] + rng.gauss(0.0, 0.05 + 0.3 * d)))
            member_probs.append(distribution(peak, 4))
        positions.append({"token_ids": [100 + t, 7, 8, 9], "member_probs": member_probs})

    embedding = rounded([rng.gauss(0.0, 1.0) * (0.5 + 2.5 * d) for _ in range(DIM)])
    return d, {
        "id": f"doc-{i:02d}",
        "input_text": " ".join(doc),
        "reference_summary": " ".join(reference),
        "greedy_text": " ".join(greedy),
        "greedy_token_logprobs": logprobs,
        "greedy_token_entropies": entropies,
        "samples": samples,
        "embedding": embedding,
        "ensemble": {"member_count": MEMBERS, "token_distributions": positions},
    }


def write_jsonl(name, rows):
    with open(os.path.join(HERE, name), "w") as f:
        for r in rows:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")


def main():
    pairs = [make_record(i) for i in range(N)]
    write_jsonl("corpus.jsonl", [r for _, r in pairs])

    write_jsonl("training_embeddings.jsonl", [
        {"embedding": rounded([rng.gauss(0.0, s) for s in TRAIN_SCALES])} for _ in range(120)
    ])

    refs = []
    for d, r in pairs:
        refs.append({
            "id": r["id"],
            "embedding": rounded([e * (1.0 - d) + rng.gauss(0.0, 0.3 + d) for e in r["embedding"]]),
        })
    write_jsonl("reference_embeddings.jsonl", refs)

    write_jsonl("p_true.jsonl", [
        {"id": r["id"], "reply": round(min(1.0, max(0.0, 0.95 - 0.8 * d + rng.gauss(0, 0.1))), 3)}
        for d, r in pairs
    ])

    write_jsonl("bartscore.jsonl", [
        {"id": r["id"], "score": round(-1.0 - 3.0 * d + rng.gauss(0, 0.4), 4)} for d, r in pairs
    ])

    replies = []
    for k, (d, r) in enumerate(pairs):
        score = min(5, max(1, round(5 - 4 * d + rng.gauss(0, 0.6))))
        reply = "I am unable to rate this summary." if k == 5 else f"Score: {score}"
        replies.append({"id": r["id"], "reply": reply})
    write_jsonl("judge_wi_ingt_consistency_responses.jsonl", replies)

    kinds = ["EI", "MR", "SOAF", "RE", "TME", "CO", "NMS"]
    annotations = []
    for d, r in pairs:
        total = len(r["greedy_text"].split())
        errors = {k: min(total, max(0, round(total * d * rng.uniform(0.0, 0.6)))) for k in kinds}
        annotations.append({"id": r["id"], "total_words": total, "errors": errors})
    write_jsonl("annotations.jsonl", annotations)


if __name__ == "__main__":
    main()
