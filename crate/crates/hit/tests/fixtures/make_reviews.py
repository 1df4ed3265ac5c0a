"""Regenerates reviews_100.jsonl, a small Amazon-style review corpus with
star ratings 1..5 mapped to labels 0..4. Deterministic; the text mixes in the
punctuation the sentence splitter has to cope with."""
import json
import random

rng = random.Random(20240611)

OPENERS = {
    0: ["Terrible purchase.", "Broke after two days!", "Do not buy this.", "Complete waste of money."],
    1: ["Not great.", "Disappointing overall.", "It works, barely.", "Expected more for the price."],
    2: ["It's okay.", "Average product.", "Does the job, nothing more.", "Mixed feelings about this one."],
    3: ["Pretty good.", "Solid value!", "Happy with it so far.", "Works as described."],
    4: ["Absolutely love it!", "Best purchase this year.", "Five stars, no question.", "Exceeded every expectation!!!"],
}
MIDDLES = [
    "Shipping took 3.5 days, which is fine.",
    "The battery lasts about 10 hours on a charge.",
    "My wife says it's the nicest one we've owned.",
    "Customer service (via e-mail) answered within a day.",
    "Build quality feels cheap?",
    "The manual is written in English, Español and Français.",
    "I compared it with the model from Mr. Lee's shop.",
    "Setup was quick: plug in, press start, done.",
    "The color is more grey than blue",
    "It's heavier than it looks... but sturdy.",
    "Would it survive a drop? Probably not.",
    "Works with v2.0 firmware out of the box.",
    "Noise level is around 40dB at full speed.",
    "Kids use it daily!",
    "The café down the street sells the same thing for less.",
]
CLOSERS = {
    0: ["Returning it.", "Avoid.", "Never again!"],
    1: ["Maybe for someone else.", "Two stars.", "Meh."],
    2: ["It's fine.", "Three stars.", "Okay for the price."],
    3: ["Would recommend.", "Four stars!", "Good buy."],
    4: ["Buy it!", "Highly recommended.", "Love, love, love it."],
}

with open("reviews_100.jsonl", "w", encoding="utf-8") as f:
    for i in range(100):
        label = rng.randrange(5)
        parts = [rng.choice(OPENERS[label])]
        parts += rng.sample(MIDDLES, rng.randint(0, 5))
        if rng.random() < 0.8:
            parts.append(rng.choice(CLOSERS[label]))
        sep = "\n" if rng.random() < 0.1 else " "
        f.write(json.dumps({"label": label, "text": sep.join(parts)}, ensure_ascii=False) + "\n")
