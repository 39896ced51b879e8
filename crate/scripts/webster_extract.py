"""Python mirror of the Rust dictionary extraction and tokenizer.

Used only to generate parse fixtures; the Rust side checks that every parse
matches its definition token for token.
"""

import re


def tokenize(text):
    chars = ["'" if c == "’" else c for c in text]
    out, cur = [], ""
    for i, c in enumerate(chars):
        if c.isalnum():
            cur += c.lower()
        elif c in "'-" and cur and i + 1 < len(chars) and chars[i + 1].isalnum():
            cur += c
        elif cur:
            out.append(cur)
            cur = ""
    if cur:
        out.append(cur)
    return out


def is_headword_line(line):
    t = line.strip()
    return bool(t) and any(c.isalpha() for c in t) and all(
        (c.isalpha() and c.isupper()) or c in "'- ;" for c in t
    )


def strip_labels(s):
    while True:
        s = s.lstrip()
        if s.startswith("(") and ")" in s:
            s = s[s.index(")") + 1 :]
            continue
        return s


def first_sentence(s):
    m = re.search(r"\.(\s|$)", s)
    return s[: m.start()] if m else s


def definition_text(p):
    if p.startswith("Defn:"):
        body = p[len("Defn:") :]
    else:
        m = re.match(r"^(\d+)\.", p)
        if not m:
            return None
        rest = strip_labels(p[m.end() :].lstrip())
        body = rest[len("Defn:") :] if rest.startswith("Defn:") else rest
    return first_sentence(strip_labels(body)).strip()


def parse_webster(text):
    out, heads, para = [], [], []

    def flush():
        if not para:
            return
        t = definition_text(" ".join(para).strip())
        if t is not None:
            g = tokenize(t)
            if g:
                for h in heads:
                    out.append((h, g))
        para.clear()

    for line in text.split("\n"):
        if not line.strip():
            flush()
            continue
        if not para and is_headword_line(line):
            heads = [v.strip().lower() for v in line.split(";") if v.strip()]
            continue
        if not heads:
            continue
        para.append(line.strip())
    flush()
    return out
