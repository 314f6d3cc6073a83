#!/usr/bin/env python3
"""Expand the base word lists into the bundled POS lexicon (word<TAB>pos).

Inflections are generated with simple English morphology rules. When a
surface form is produced by several lists, the first assignment wins in
this order: noun base, irregular verb forms, regular verb inflections,
adjectives (incl. -ly adverbs as other), verb base, noun plurals.
"""
import pathlib

HERE = pathlib.Path(__file__).resolve().parent
VOWELS = set("aeiou")


def words(name):
    return [w for w in (HERE / name).read_text().split() if w]


def plural(w):
    if w.endswith("y") and len(w) > 2 and w[-2] not in VOWELS:
        return w[:-1] + "ies"
    if w.endswith(("s", "x", "z", "ch", "sh")):
        return w + "es"
    return w + "s"


def doubles(w):
    # CVC ending on a short stem doubles the final consonant (stop -> stopped)
    return (len(w) >= 3 and len(w) <= 4 and w[-1] not in VOWELS | set("wxy")
            and w[-2] in VOWELS and w[-3] not in VOWELS)


def verb_forms(w):
    third = plural(w)
    if w.endswith("e") and not w.endswith("ee"):
        past, ing = w + "d", w[:-1] + "ing"
    elif w.endswith("ee"):
        past, ing = w + "d", w + "ing"
    elif w.endswith("y") and len(w) > 2 and w[-2] not in VOWELS:
        past, ing = w[:-1] + "ied", w + "ing"
    elif doubles(w):
        past, ing = w + w[-1] + "ed", w + w[-1] + "ing"
    else:
        past, ing = w + "ed", w + "ing"
    return [third, past, ing]


def main():
    lex = {}

    def put(word, tag):
        lex.setdefault(word, tag)

    nouns = words("nouns.txt")
    verbs = words("verbs.txt")
    adjectives = words("adjectives.txt")
    irregular = [line.split() for line in (HERE / "verbs_irregular.txt").read_text().splitlines() if line.strip()]
    irregular_bases = {row[0] for row in irregular}

    for n in nouns:
        put(n, "noun")
    for row in irregular:
        for form in row:
            put(form, "verb")
    for v in verbs:
        if v in irregular_bases:
            continue
        for form in verb_forms(v):
            put(form, "verb")
    for a in adjectives:
        put(a, "adjective")
    for v in verbs:
        put(v, "verb")
    for n in nouns:
        put(plural(n), "noun")

    out = HERE.parent / "pos_lexicon.tsv"
    out.write_text("".join(f"{w}\t{t}\n" for w, t in sorted(lex.items())))
    print(f"{len(lex)} entries -> {out}")


if __name__ == "__main__":
    main()
