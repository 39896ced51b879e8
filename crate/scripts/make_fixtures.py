#!/usr/bin/env python3
"""Regenerates the parse and polarity fixtures under fixtures/.

No statistical parser is available offline, so parses come from a small
rule-based tagger and head-attachment heuristic. The rules only have to be
deterministic and produce well-formed single-rooted trees; they make no claim
to match a trained parser.

    python3 scripts/make_fixtures.py
"""

import os
import random
import sys

sys.path.insert(0, os.path.dirname(__file__))
from webster_extract import parse_webster, tokenize  # noqa: E402

ROOT = os.path.join(os.path.dirname(__file__), "..", "fixtures")

DET = set("a an the any every each some this these those no another either both all".split())
POSS = set("its his her their our your my".split())
PRON = set("one it him she he you i we they them me something anything nothing someone others whom".split())
REL = set("who which whose that".split())
ADP = set(
    "of in on at by with from for into upon through toward about above under over between "
    "without within after before against along across like than as off out around".split()
)
CCONJ = set("and or but nor".split())
SCONJ = set("when whether because if so".split())
AUX = set("is are was were be being been has have had may can will should would do does did".split())
NUM = set("first single once".split())
ADV = set(
    "again away commonly down especially laboriously naturally only progressively relatively rightly "
    "secretly softly swiftly together usually very much else most really truly quite rather too".split()
)
ADJ = set(
    """able acrid agreeable afraid attractive averse best big blooded bold brilliant bright calm carnivorous
    cold common considerable contented courageous crowned daring destitute devoted disinclined disposed
    domesticated due edged explosive fair feeble female finest flat free frozen furry good great greater
    hard harsh high hoofed hostile human idle innumerable joyous kind large limbless long loud low loyal
    luminous male mature mean melodious mild military moderate movable muscular musical natural near needy
    noble obscure old opposite opulent other painful peculiar physical poisonous powerful private public
    quick quiet rapid refined rough sacred same savage sensible sharp short sick silly slender small smaller
    soft sorrowful southern sovereign sparkling speedy still strong sudden supreme swift tall tawny tender
    timid true unconscious unpleasant upright visible void warm weak wealthy weighty white wild willing winged
    woody worthless wrong young happy sad angry hot heavy slow rich poor brave wise foolish empty bitter
    sweet ancient dark honest lazy gentle cruel dull fine lovely clever tedious boring charming""".split()
)
VERB = set(
    """acquire advance applaud ascend attached attempts authorized bake baked bearing beating befall bestow
    borne bound breathes bring burned buying call carried carry carrying cast cause caused cease chew cleanse
    closed closes commend conceal confer consisting construct consume containing contend covered covers crawls
    cry cultivates decide detest devour dipping done drawing drawn drink driving eaten eating enables enforced
    engaged enjoying enraged erect established excited exert exhibiting existed explain express falling feel
    felt fights fixed flies floating flow flowing follows found gathers give gives gnawing go grazing guards
    happened hates having heal hear heard heaved holding hunted hunts impart injure instruct instructs intended
    kept knowing known lays let lifted lives loves lose lost made make making marked married measuring meet
    mixed mount move moving navigating obtaining offer pass pay paying perceive perform preys prepare printed
    propelled put putting radiating raises receive receiving reduce reflected reflecting renewed retains return
    returning revolves riding rising roasting rubbing rules secreted seen selling sent separate serves set
    shedding shines shining show showing solve speak stamped strive supported surrounded sustain swallow take
    takes teaches traffics transfer turned understand unlock use used utter wishes written barks belongs
    carries chase decides fall flows get keep makes open read ride steals sting treat using enjoy love hate
    praise remember forget laugh weep sing whisper shout fight steal build write teach swim fly climb hide burn
    cut wash cook borrow forgive run walk eat sell buy""".split()
)
NOMINAL = {"NOUN", "PROPN", "PRON"}
NOT_ADV = set("family folly belly lily holly".split())


def tag(words):
    tags = []
    n = len(words)
    for i, w in enumerate(words):
        nxt = words[i + 1] if i + 1 < n else None
        prev = words[i - 1] if i > 0 else None
        if w == "to":
            t = "PART" if nxt in VERB or (nxt in ADV and i + 2 < n and words[i + 2] in VERB) else "ADP"
        elif w == "not":
            t = "PART"
        elif w == "that":
            t = "PRON" if prev is not None and tags[-1] in NOMINAL else "DET"
        elif w in REL:
            t = "PRON"
        elif w in POSS:
            t = "PRON"
        elif w in DET:
            t = "DET"
        elif w in PRON:
            t = "PRON"
        elif w in AUX:
            t = "AUX"
        elif w in ADP:
            t = "ADP"
        elif w in CCONJ:
            t = "CCONJ"
        elif w in SCONJ:
            t = "SCONJ"
        elif w in NUM:
            t = "NUM"
        elif w in ADV or (w.endswith("ly") and w not in ADJ and w not in NOT_ADV and len(w) > 4):
            t = "ADV"
        elif w in ADJ:
            t = "ADJ"
        elif w in VERB:
            # a verb form right after a determiner or adjective is a noun
            t = "NOUN" if prev in DET or prev in POSS or (tags and tags[-1] == "ADJ") else "VERB"
        elif w.endswith("ing") and len(w) > 5 and not (prev in DET or prev in POSS or prev == "of"):
            t = "VERB"
        else:
            t = "NOUN"
        tags.append(t)
    return tags


PREMOD = {"DET", "AUX", "PART", "ADP", "CCONJ", "SCONJ"}


def is_premod(words, tags, i):
    t, w = tags[i], words[i]
    nxt = tags[i + 1] if i + 1 < len(tags) else None
    if t in PREMOD:
        return True
    if t == "PRON" and (w in REL or w in POSS):
        return nxt is not None
    if t in ("ADJ", "NUM"):
        return nxt in ("NOUN", "ADJ", "NUM")
    if t == "NOUN":
        return nxt == "NOUN"
    if t == "ADV":
        return nxt in ("ADJ", "VERB", "ADV", "AUX")
    return False


def category(t):
    return "N" if t in NOMINAL else t


def heads_for(words, tags):
    """1-based HEAD column; exactly one 0."""
    n = len(words)
    head = [None] * n
    heads = []  # indices of phrase heads, in order
    pending = []
    root = None
    for i in range(n):
        if i + 1 < n and is_premod(words, tags, i):
            pending.append(i)
            continue
        ptags = {tags[p] for p in pending}
        pwords = {words[p] for p in pending}
        if root is None:
            g = None
            root = i
        elif "CCONJ" in ptags:
            same = [h for h in heads if category(tags[h]) == category(tags[i])]
            g = same[-1] if same else heads[-1]
        elif pwords & REL:
            noms = [h for h in heads if tags[h] in NOMINAL]
            g = noms[-1] if noms else heads[-1]
        elif "ADP" in ptags:
            g = heads[-1]
        elif tags[i] == "VERB":
            verbs = [h for h in heads if tags[h] == "VERB"]
            g = verbs[-1] if verbs else heads[-1]
        else:
            g = heads[-1]
        head[i] = 0 if g is None else g + 1
        for p in pending:
            head[p] = i + 1
        pending = []
        heads.append(i)
    for p in pending:
        head[p] = heads[-1] + 1 if heads else 0
    if root is None:
        # only premodifiers: the last one is the root
        head[n - 1] = 0
        for p in range(n - 1):
            head[p] = n
    return head


def conllu_block(words, text=None):
    tags = tag(words)
    head = heads_for(words, tags)
    assert head.count(0) == 1, (words, head)
    lines = []
    if text is not None:
        lines.append(f"# text = {text}")
    for k, (w, t, h) in enumerate(zip(words, tags, head), start=1):
        rel = "root" if h == 0 else "dep"
        lines.append(f"{k}\t{w}\t_\t{t}\t_\t_\t{h}\t{rel}\t_\t_")
    return "\n".join(lines) + "\n\n"


def write_parses(src, dst):
    with open(os.path.join(ROOT, src), encoding="utf-8") as f:
        defs = parse_webster(f.read())
    with open(os.path.join(ROOT, dst), "w", encoding="utf-8") as f:
        for hw, gloss in defs:
            f.write(f"# headword = {hw}\n")
            f.write(conllu_block(gloss))
    return defs


# Polarity corpus: short review-like sentences over words that also occur in
# the dictionary fixture, labelled by rule and then flipped with a fixed
# probability to stand in for the label noise of real review data.
POS_ADJ = """happy bright sweet gentle brave wise honest strong quick good great kind noble warm brilliant
attractive agreeable joyous calm true rich tender mild refined courageous contented fair melodious powerful
free""".split()
NEG_ADJ = """sad cruel foolish bitter lazy weak slow dark empty cold loud silly savage painful unpleasant
worthless harsh feeble obscure idle rough hostile wrong mean poor timid sorrowful dull""".split()
SUBJ = """king soldier teacher friend child thief farmer doctor sailor poet widow merchant judge priest servant
mother baker enemy horse dog cat lion wolf book poem letter voice story music stage ending""".split()
POS_VERB = "enjoy love praise remember commend".split()
NEG_VERB = "hate detest forget".split()
ADVS = "very really truly quite rather".split()
LABEL_NOISE = 0.12


def polarity_sentence(rng, want_pos):
    """Returns (words, rule label)."""
    def adj(p):
        return rng.choice(POS_ADJ if p else NEG_ADJ)

    def np():
        return ["the", rng.choice(SUBJ)]

    form = rng.randrange(7)
    if form == 0:
        neg = rng.random() < 0.3
        p = want_pos != neg
        adv = [rng.choice(ADVS)] if rng.random() < 0.4 else []
        return np() + ["is"] + (["not"] if neg else []) + adv + [adj(p)], want_pos
    if form == 1:
        return np() + ["is", adj(want_pos), "and", adj(want_pos)], want_pos
    if form == 2:
        return np() + ["is", adj(not want_pos), "but", adj(want_pos)], want_pos
    if form == 3:
        neg = rng.random() < 0.3
        p = want_pos != neg
        v = rng.choice(POS_VERB if p else NEG_VERB)
        return ["i"] + (["do", "not"] if neg else []) + [v] + np(), want_pos
    if form == 4:
        return ["a", adj(want_pos), rng.choice(SUBJ), "and", "a", adj(want_pos), rng.choice(SUBJ)], want_pos
    if form == 5:
        return np() + ["of"] + np() + ["is", adj(want_pos)], want_pos
    s1 = np() + ["is", adj(want_pos)]
    s2 = np() + ["is", adj(want_pos)]
    return s1 + ["and"] + s2, want_pos


def write_polarity(n_per_class=1200, seed=20):
    rng = random.Random(seed)
    seen = set()
    out = {True: [], False: []}
    for want in (True, False):
        while len(out[want]) < n_per_class:
            words, label = polarity_sentence(rng, want)
            key = " ".join(words)
            if key in seen:
                continue
            seen.add(key)
            out[want].append(words)
    # label noise moves sentences between the two files
    files = {True: [], False: []}
    for label in (True, False):
        for words in out[label]:
            noisy = label if rng.random() >= LABEL_NOISE else not label
            files[noisy].append(words)
    os.makedirs(os.path.join(ROOT, "polarity"), exist_ok=True)
    for label, name in ((True, "pos"), (False, "neg")):
        rows = files[label]
        with open(os.path.join(ROOT, "polarity", f"{name}.txt"), "w", encoding="utf-8") as f:
            f.writelines(" ".join(w) + "\n" for w in rows)
        with open(os.path.join(ROOT, "polarity", f"{name}.conllu"), "w", encoding="utf-8") as f:
            for w in rows:
                f.write(conllu_block(w, " ".join(w)))
    return files


def main():
    train = write_parses("webster_144.txt", "webster_144.conllu")
    test = write_parses("paraphrase_test_30.txt", "paraphrase_test_30.conllu")
    files = write_polarity()
    vocab = {h for h, _ in train} | {w for _, g in train for w in g}
    pol = {w for ws in files[True] + files[False] for w in ws}
    print(f"train definitions: {len(train)}, test definitions: {len(test)}")
    print(f"polarity: {len(files[True])} pos / {len(files[False])} neg")
    print(f"polarity words outside dictionary vocab: {sorted(pol - vocab)}")


if __name__ == "__main__":
    main()
