#!/usr/bin/env python3
"""Writes data/fixture_sequences.txt, the default intent-sequence corpus.

Sequences come from a small hand-set Markov chain over MSDialog-style
intent sets so that every code appears and multi-intent utterances are
common. Output is deterministic.
"""

import pathlib
import random

# next-state weights per state; states are canonical "A+B" sets
CHAIN = {
    "START": {"OQ": 90, "OQ+FD": 6, "GG+OQ": 4},
    "OQ": {"PA": 40, "CQ": 14, "IR": 12, "PA+IR": 12, "RQ": 4, "O": 3, "JK": 2, "FQ": 3},
    "OQ+FD": {"PA": 50, "PA+IR": 20, "CQ": 10},
    "GG+OQ": {"PA": 50, "IR": 15},
    "PA": {"PF": 18, "NF": 10, "FD": 12, "FQ": 16, "GG": 10, "PF+GG": 12, "END": 24, "FD+FQ": 6},
    "PA+IR": {"FD": 40, "FD+FQ": 10, "PF": 10, "END": 10},
    "CQ": {"FD": 60, "FD+PA": 10, "O": 5},
    "IR": {"FD": 70, "NF": 5},
    "RQ": {"PA": 60, "IR": 10},
    "FD": {"PA": 50, "PA+IR": 14, "CQ": 10, "GG": 6, "END": 10},
    "FD+FQ": {"PA": 60, "PA+FD": 10},
    "FD+PA": {"PF": 30, "FQ": 20, "END": 20},
    "PA+FD": {"PF": 30, "PF+GG": 20, "END": 20},
    "FQ": {"PA": 60, "PA+FD": 12, "IR": 8},
    "PF": {"GG": 40, "FQ": 10, "END": 40},
    "NF": {"PA": 40, "FD": 20, "JK": 4, "END": 10},
    "PF+GG": {"GG": 30, "END": 60},
    "GG": {"GG": 10, "PF": 5, "END": 70},
    "O": {"PA": 30, "FD": 20, "END": 20},
    "JK": {"O": 20, "PA": 20, "END": 30},
}


def walk(rng: random.Random) -> list[str]:
    seq, state = [], "START"
    while True:
        options = CHAIN[state]
        state = rng.choices(list(options), weights=list(options.values()))[0]
        if state == "END" or len(seq) == 20:
            return seq
        seq.append(state)


def main() -> None:
    rng = random.Random(20240101)
    lines = ["# Default intent-sequence corpus (one sequence per line).", "# Generated by tools/make_fixture_sequences.py."]
    count = 0
    while count < 600:
        seq = walk(rng)
        if len(seq) < 2:
            continue
        lines.append("; ".join(seq))
        count += 1
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixture_sequences.txt"
    out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
