"""Writes encode_golden.json: documents, an explicit vocabulary and the padded
layout expected from encode_and_pad, derived here independently.

Layout rule: keep the first m_max sentences and the first k_max words of each;
slot k_max of every real sentence holds [CLS]; every other slot is [PAD] and
masked; words missing from the vocabulary become [UNK]."""
import json

vocab = ["[PAD]", "[UNK]", "[CLS]", "the", "screen", "is", "bright", "battery", "dies", "fast", "love", "it"]
docs = [
    {"label": 2, "text": "The screen is very bright. Battery dies fast!"},
    {"label": 0, "text": "Love it."},
    {"label": 1, "text": "It is. The battery is the best thing in the box! Dies? Fast. Extra sentence."},
]
k_max, m_max = 4, 3


def sentences(text):
    out, start = [], 0
    for i, c in enumerate(text):
        if c in ".!?" and (i + 1 == len(text) or text[i + 1].isspace()):
            out.append(text[start:i + 1].strip())
            start = i + 1
    if text[start:].strip():
        out.append(text[start:].strip())
    return [s for s in out if s]


def tokens(s):
    return "".join(c.lower() if c.isalnum() else " " for c in s).split()


grid, word_mask, sent_mask = [], [], []
for d in docs:
    sents = sentences(d["text"])[:m_max]
    g, wm, sm = [], [], []
    for si in range(m_max):
        if si < len(sents):
            toks = [t if t in vocab else "[UNK]" for t in tokens(sents[si])][:k_max]
            row = toks + ["[PAD]"] * (k_max - len(toks)) + ["[CLS]"]
            mask = [1] * len(toks) + [0] * (k_max - len(toks)) + [1]
            sm.append(1)
        else:
            row, mask = ["[PAD]"] * (k_max + 1), [0] * (k_max + 1)
            sm.append(0)
        g.append(row)
        wm.append(mask)
    grid.append(g)
    word_mask.append(wm)
    sent_mask.append(sm)

with open("encode_golden.json", "w", encoding="utf-8") as f:
    json.dump({"vocab": vocab, "docs": docs, "k_max": k_max, "m_max": m_max, "num_classes": 3,
               "grid": grid, "word_mask": word_mask, "sent_mask": sent_mask}, f, indent=1)
    f.write("\n")
