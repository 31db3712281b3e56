"""Rebuild ``src/procsec/data/human_corpus.txt`` from the public-domain sources.

Usage::

    python scripts/build_corpus.py ALICE_TXT AREOPAGITICA_TXT BRITANNICA_TXT

The inputs are Project Gutenberg plain-text editions (Alice's Adventures in
Wonderland, Areopagitica) and the Encyclopaedia Britannica 11th edition entry
"Shakespeare, William" as distributed in the ``wordcloud`` and ``shakespeare``
sdists on PyPI. Every Gutenberg header/footer line is stripped.
"""
import re
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "procsec" / "data" / "human_corpus.txt"


def _paragraphs(lines):
    buf = []
    for line in lines:
        line = line.strip()
        if not line:
            if buf:
                yield " ".join(buf)
                buf = []
            continue
        if buf and buf[-1].endswith("-") and re.match(r"[a-z]", line) and re.search(r"[a-z]-$", buf[-1]):
            buf[-1] = buf[-1][:-1] + line
        else:
            buf.append(line)
    if buf:
        yield " ".join(buf)


def _keep(par):
    words = par.split()
    if len(words) < 12:
        return False
    letters = sum(ch.isalpha() for ch in par)
    uppers = sum(ch.isupper() for ch in par)
    return uppers < 0.5 * letters


def alice(path):
    text = Path(path).read_text(encoding="utf-8-sig")
    start = text.index("CHAPTER I.")
    end = text.index("End of Project Gutenberg")
    return [p for p in _paragraphs(text[start:end].splitlines()) if _keep(p)]


def areopagitica(path):
    text = Path(path).read_text(encoding="utf-8", errors="replace")
    lines = [ln for ln in text.splitlines() if not ln.startswith("     ")]
    return [p for p in _paragraphs(lines) if _keep(p)]


def britannica(path):
    text = Path(path).read_text(encoding="utf-8", errors="replace")
    lines = []
    for ln in text.splitlines():
        if ln.startswith("#") or re.match(r"p\.\d+:\d+", ln) or re.match(r"\[[^\]]*\]\s*$", ln):
            continue
        lines.append(ln)
    out = []
    for p in _paragraphs(lines):
        if p.startswith("[^") or not _keep(p):
            continue
        p = re.sub(r"\[\^\d+\]", "", p)
        out.append(p.replace("--", " - "))
    return out


def main(argv):
    a, m, b = argv
    sources = [
        ("Lewis Carroll, Alice's Adventures in Wonderland (1865)", alice(a)),
        ("John Milton, Areopagitica (1644)", areopagitica(m)),
        ("Encyclopaedia Britannica, 11th ed. (1911), 'Shakespeare, William'", britannica(b)),
    ]
    with OUT.open("w", encoding="utf-8") as fh:
        for title, pars in sources:
            fh.write(f"=== {title}\n")
            for p in pars:
                fh.write(re.sub(r"\s+", " ", p).strip() + "\n")
    print(OUT, sum(len(p.split()) for _, pars in sources for p in pars), "words")


if __name__ == "__main__":
    main(sys.argv[1:])
