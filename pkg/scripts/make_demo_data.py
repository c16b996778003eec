#!/usr/bin/env python3
"""Regenerate the committed demo corpus under data/.

Writes the corruption rule set, clean train/test reference transcripts
sampled from Italian voice-command templates, and the acceptance pipeline
config.  Fully deterministic; rerunning reproduces identical files.
"""

from __future__ import annotations

import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, os.pardir, "data")

# Phrase corruptions applied with probability 1.0: these are the mappings
# the trained system is expected to invert exactly.
CORE_RULES = [
    ("ricomincia", "recommence", 1.0),
    ("sì", "she", 1.0),
    ("ripeti", "repeating", 1.0),
    ("avanti", "i want tea", 1.0),
    ("cosa sai fare", "cause of sci-fi", 1.0),
    ("buonanotte", "bueno no te", 1.0),
    ("buongiorno", "bonjour", 1.0),
]

# Probabilistic confusions.  Replacement tokens never collide with clean
# vocabulary, so corrupted text is unambiguous about which rule produced it.
EXTRA_RULES = [
    ("luce", "loose", 0.8),
    ("tempo", "tiempo", 0.9),
    ("grazie", "gracias", 0.85),
    ("che ore", "corey", 0.8),
    ("la lista", "the list", 0.75),
    ("canzone", "can zone", 0.85),
    ("musica", "moosika", 0.7),
    ("accendi", "ah chen dee", 0.6),
    ("spegni", "spaghetti", 0.75),
    ("domani", "the money", 0.7),
    ("oggi", "oh gee", 0.8),
    ("chiama", "key ama", 0.65),
    ("sveglia", "svelia", 0.7),
    ("volume", "volyum", 0.8),
    ("cucina", "coo chee na", 0.6),
    ("famiglia", "familia", 0.85),
    ("giardino", "jardin", 0.75),
    ("finestra", "fin astra", 0.7),
    ("temperatura", "temper ah tura", 0.65),
    ("notizie", "noteetsia", 0.7),
    ("meteo", "meadow", 0.6),
    ("salotto", "saloon", 0.65),
    ("per favore", "prefer array", 0.6),
]

ROOMS = ["cucina", "salotto", "camera", "bagno", "giardino", "studio"]
HOURS = ["sei", "sette", "otto", "nove", "dieci"]
NAMES = ["maria", "franco", "nonna", "luca", "sara", "marco"]
ITEMS = ["pane", "latte", "uova", "caffè", "pasta"]
GENRES = ["jazz", "rock", "classica"]

TEMPLATES = [
    "accendi la luce",
    "accendi la luce in {room}",
    "spegni la luce",
    "spegni la luce in {room}",
    "accendi il forno",
    "spegni tutto",
    "metti la sveglia alle {hour}",
    "togli la sveglia",
    "che tempo fa domani",
    "che tempo fa oggi",
    "domani che tempo fa",
    "com'è il meteo",
    "il meteo di domani",
    "metti la musica",
    "metti la playlist {genre}",
    "spegni la musica per favore",
    "alza il volume",
    "abbassa il volume",
    "volume al massimo",
    "che ore sono",
    "dimmi che ore sono",
    "chiama {name}",
    "chiama la famiglia",
    "leggi la lista della spesa",
    "aggiungi {item} alla lista",
    "ricomincia la canzone",
    "ricomincia",
    "salta questa canzone",
    "sì",
    "sì grazie",
    "va bene grazie",
    "grazie mille",
    "ripeti",
    "ripeti per favore",
    "avanti",
    "avanti veloce",
    "vai avanti",
    "cosa sai fare",
    "dimmi cosa sai fare",
    "buonanotte",
    "buonanotte a tutti",
    "buongiorno",
    "buongiorno {name}",
    "apri la finestra",
    "chiudi la finestra",
    "apri la finestra del salotto",
    "qual è la temperatura",
    "imposta la temperatura a venti gradi",
    "imposta il timer a venti minuti",
    "quanto tempo manca",
    "le notizie di {when}",
    "racconta una barzelletta",
]

SLOTS = {
    "room": ROOMS,
    "hour": HOURS,
    "name": NAMES,
    "item": ITEMS,
    "genre": GENRES,
    "when": ["oggi", "domani", "stasera"],
}

# Test utterances that pin down each always-on corruption in context.
FORCED_TEST = [
    "ricomincia",
    "ricomincia la canzone",
    "sì",
    "sì grazie",
    "ripeti",
    "ripeti per favore",
    "avanti",
    "avanti veloce",
    "cosa sai fare",
    "dimmi cosa sai fare",
    "buonanotte",
    "buonanotte a tutti",
    "buongiorno",
    "buongiorno maria",
]


def render(template: str, rng: random.Random) -> str:
    text = template
    for slot, values in SLOTS.items():
        token = "{" + slot + "}"
        while token in text:
            text = text.replace(token, rng.choice(values), 1)
    return text


def sample_corpus(count: int, prefix: str, rng: random.Random, forced=()):
    lines = [
        f"{prefix}-{i + 1:04d}\t{text}" for i, text in enumerate(forced)
    ]
    for i in range(len(forced), count):
        text = render(rng.choice(TEMPLATES), rng)
        lines.append(f"{prefix}-{i + 1:04d}\t{text}")
    return lines


def main() -> None:
    os.makedirs(DATA, exist_ok=True)
    rules_path = os.path.join(DATA, "rules_default.tsv")
    with open(rules_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# match<TAB>replacement<TAB>probability\n")
        for match, replacement, prob in CORE_RULES + EXTRA_RULES:
            fh.write(f"{match}\t{replacement}\t{prob}\n")

    rng = random.Random(20240815)
    train = sample_corpus(5000, "train", rng)
    test = sample_corpus(500, "test", rng, forced=FORCED_TEST)
    for name, lines in (("refs_train.tsv", train), ("refs_test.tsv", test)):
        with open(os.path.join(DATA, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    config = """\
# Acceptance pipeline configuration.
refs_train = refs_train.tsv
refs_test = refs_test.tsv
rules = rules_default.tsv
seed = 42
nbest_size = 25
deletion_prob = 0.05
temperature = 0.1
nbest_train = 25 1
order = 5
max_x = 3
max_y = 3
em_iters = 20
em_epsilon = 1e-6
decode_nbest = 500
topk = 1
passthrough_penalty = 8.0
beam = none
figures = true
"""
    with open(os.path.join(DATA, "acceptance.cfg"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(config)
    print(f"wrote rules ({len(CORE_RULES) + len(EXTRA_RULES)}), "
          f"{len(train)} train refs, {len(test)} test refs under {DATA}")


if __name__ == "__main__":
    main()
