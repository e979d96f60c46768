"""From dependency parses to discriminative triads.

A referring expression like "the left man in black holding a red cat and
standing on a table" carries several independent clues about which object
is meant.  Each clue becomes a triad (target, reference, cue): the word
for the referent, the word for the object it is compared against, and the
word that tells them apart.  This script walks the bundled fixture
queries through the extraction rules.
"""

from pathlib import Path

from triadground import extract_triads, read_parses

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main():
    parses = read_parses(FIXTURES / "table1.conllu")
    for parse in parses:
        sentence = " ".join(parse.words())
        query = extract_triads(parse)
        print(f"{parse.sentence_id}: {sentence!r}")
        for triad in query.triads:
            t, r, d = triad.units()
            kind = (
                "bare noun" if d == "SELF"
                else "no noun" if t == "UKN"
                else "unary cue" if t == r
                else "pair cue"
            )
            print(f"   {triad.triad_id}. ({t}, {r}, {d})   <- {kind}")
        print()

    print("Special tokens: SELF marks a query with no cue at all ('man'),")
    print("UKN marks a query with no noun to anchor on ('left').")


if __name__ == "__main__":
    main()
