"""Writes the small demonstration corpus in data/sample/.

Tweets are assembled from topic phrases; likes are negative binomial with a
mean that rises with followers and a few of the topics.
"""
import json
import math
import random
from datetime import datetime, timedelta, timezone

rng = random.Random(20160209)
author = "realDonaldTrump"
start = datetime(2016, 1, 1, tzinfo=timezone.utc)

phrases = {
    "Obama": ["Obama has been a disaster", "ObamaCare is failing"],
    "Clinton": ["Crooked Hillary", "Hillary Clinton cannot lead"],
    "Cruz": ["Ted Cruz is a liar", "Cruz lost Iowa fair?"],
    "Rubio": ["Lightweight Rubio", "@marcorubio is all talk", "marco rubio choked"],
    "Jeb": ["Jeb has low energy"],
    "ISIS": ["We will knock out ISIS", "ISIS must be stopped"],
    "Immigration": ["Build the border wall", "illegal immigration must end"],
    "Drugs": ["Heroin is pouring across", "stop the drug epidemic"],
    "Economy": ["Bring back our jobs", "the economy is rigged"],
    "Abortion": ["defund Planned Parenthood", "I am pro-life on abortion"],
    "Trump": ["Trump 2016!", "Thank you from Trump Tower"],
}
effects = {"ISIS": 0.5, "Immigration": 0.3, "Clinton": 0.25, "Obama": 0.2, "Jeb": -0.3}
fillers = ["Thank you New Hampshire", "Great crowd tonight", "Make America Great Again!", "so much winning"]

followers = []
t = start
count = 5_000_000
while t <= start + timedelta(days=60):
    followers.append((t, count))
    count += rng.randint(5_000, 30_000)
    t += timedelta(hours=6)

rows = []
for i in range(240):
    ts = start + timedelta(minutes=rng.randint(0, 60 * 24 * 59))
    topics = [k for k in phrases if rng.random() < 0.12]
    parts = [rng.choice(phrases[k]) for k in topics] or [rng.choice(fillers)]
    if rng.random() < 0.3:
        parts.append("https://t.co/" + "".join(rng.choice("abcdefghijk0123456789") for _ in range(8)))
    text = ". ".join(parts)
    f = max(c for (tt, c) in followers if tt <= ts)
    eta = 8.0 + 0.8 * (f - 5_000_000) / 1_000_000 + sum(effects.get(k, 0.0) for k in topics)
    mu = math.exp(eta)
    alpha = 0.07
    v = rng.gammavariate(1 / alpha, alpha)
    lam = v * mu
    likes = max(0, int(round(rng.gauss(lam, math.sqrt(lam)))))
    rows.append({"id": f"t{i:04d}", "timestamp": ts.strftime("%Y-%m-%dT%H:%M:%SZ"), "text": text,
                 "likes": likes, "author": author})

rows.sort(key=lambda r: (r["timestamp"], r["id"]))
with open("data/sample/corpus.jsonl", "w", encoding="utf-8") as fh:
    for r in rows:
        fh.write(json.dumps(r, ensure_ascii=False) + "\n")
with open("data/sample/followers.csv", "w", encoding="utf-8") as fh:
    fh.write("author,timestamp,count\n")
    for tt, c in followers:
        fh.write(f"{author},{tt.strftime('%Y-%m-%dT%H:%M:%SZ')},{c}\n")
