"""Regenerate crates/core/tests/data/porter_vocabulary.tsv.

Stems a word list with NLTK's PorterStemmer in ORIGINAL_ALGORITHM mode and
writes one `word<TAB>stem` line per word. The word list is every lowercase
alphabetic token of length 3 to 14 found in the given text files (every
fourth one after sorting), plus the classic Porter example words.

    pip install nltk
    python scripts/freeze_porter_vocabulary.py /usr/lib/python3*/**/*.py
"""

import glob
import re
import sys
from pathlib import Path

from nltk.stem.porter import PorterStemmer

CLASSIC = """caresses ponies ties caress cats feed agreed plastered bled motoring sing
conflated troubled sized hopping tanned falling hissing fizzed failing filing happy sky
relational conditional rational valenci hesitanci digitizer conformabli radicalli
differentli vileli analogousli vietnamization predication operator feudalism
decisiveness hopefulness callousness formaliti sensitiviti sensibiliti triplicate
formative formalize electriciti electrical hopeful goodness revival allowance inference
airliner gyroscopic adjustable defensible irritant replacement adjustment dependent
adoption homologou communism activate angulariti homologous effective bowdlerize
probate rate cease controll roll generalizations oscillators winners winning meeting
spam offers free cash a is be as""".split()

OUT = Path(__file__).resolve().parent.parent / "crates/core/tests/data/porter_vocabulary.tsv"


def main(patterns):
    files = [f for p in patterns for f in glob.glob(p, recursive=True)][:3000]
    words = set()
    for f in files:
        try:
            text = open(f, encoding="utf-8").read()
        except (OSError, UnicodeDecodeError):
            continue
        for w in re.findall(r"[A-Za-z]+", text):
            w = w.lower()
            if 3 <= len(w) <= 14:
                words.add(w)
    vocabulary = sorted(set(sorted(words)[::4]) | set(CLASSIC))
    stemmer = PorterStemmer(PorterStemmer.ORIGINAL_ALGORITHM)
    with open(OUT, "w") as fh:
        for w in vocabulary:
            fh.write(f"{w}\t{stemmer.stem(w)}\n")
    print(f"{len(vocabulary)} words -> {OUT}")


if __name__ == "__main__":
    main(sys.argv[1:])
