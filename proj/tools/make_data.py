#!/usr/bin/env python3
"""Regenerates the shipped data directory.

    data/templates/*.png        synthetic template artwork (flat shapes)
    data/catalog.json           desk-scale catalog (8 templates)
    data/catalog_full.json     the 24-template catalog
    data/corpus.jsonl           synthetic captions for the desk catalog
    data/lexicon/tags.tsv       part-of-speech lexicon plus suffix rules
    data/lexicon/sentiment.tsv  word valences
    data/samples/*              small evaluation inputs for the CLI

Output is fully determined by SEED, so rerunning gives identical files.
"""

import json
import pathlib
import random
import re

from PIL import Image, ImageDraw

SEED = 20201014
ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

FULL_TEMPLATES = [
    "Bad Luck Brian", "Leonardo Dicaprio Cheers", "Success Kid", "X X Everywhere", "Ancient Aliens",
    "Disaster Girl", "One Does Not Simply", "Third World Skeptical Kid", "Futurama Fry", "10 Guy",
    "Am I The Only One Around Here", "Captain Picard Facepalm", "Brace Yourselves X is Coming",
    "Creepy Condescending Wonka", "Matrix Morpheus", "Y U No", "But Thats None Of My Business",
    "Roll Safe Think About It", "Waiting Skeleton", "The Most Interesting Man In The World",
    "First World Problems", "Hide the Pain Harold", "That Would Be Great", "Grumpy Cat",
]

DESK_TEMPLATES = [
    "Success Kid", "Bad Luck Brian", "One Does Not Simply", "Matrix Morpheus",
    "Futurama Fry", "Grumpy Cat", "Leonardo Dicaprio Cheers", "Waiting Skeleton",
]

# Templates with a second image variant.
TWO_VARIANTS = {"Success Kid", "Matrix Morpheus", "Grumpy Cat"}

SIZE = 240


def slug(name):
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def draw_template(name, variant, rng):
    """Flat-color placeholder art: background, a 'subject' disc and a few blocks."""
    hue = [rng.randrange(40, 200) for _ in range(3)]
    img = Image.new("RGB", (SIZE, SIZE), tuple(hue))
    d = ImageDraw.Draw(img)
    for _ in range(4):
        x0, y0 = rng.randrange(0, SIZE - 40), rng.randrange(40, SIZE - 60)
        color = tuple(min(255, c + rng.randrange(-60, 60) % 256) for c in hue)
        d.rectangle([x0, y0, x0 + rng.randrange(20, 80), y0 + rng.randrange(20, 60)], fill=color)
    cx = SIZE // 2 + (20 if variant else 0)
    d.ellipse([cx - 50, 70, cx + 50, 170], fill=(230, 200, 170))
    d.ellipse([cx - 25, 100, cx - 12, 113], fill=(30, 30, 30))
    d.ellipse([cx + 12, 100, cx + 25, 113], fill=(30, 30, 30))
    d.arc([cx - 25, 120, cx + 25, 150], 10, 170, fill=(60, 20, 20), width=3)
    return img


def write_images():
    out = DATA / "templates"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    paths = {}
    for name in FULL_TEMPLATES:
        files = []
        for v in range(2 if name in TWO_VARIANTS else 1):
            fname = f"{slug(name)}_{v}.png"
            draw_template(name, v, rng).save(out / fname, optimize=True)
            files.append(f"templates/{fname}")
        paths[name] = files
    return paths


def write_catalogs(paths):
    def entry(name, i):
        bottom = i % 2 == 1
        return {
            "name": name,
            "images": paths[name],
            "caption_box": {"x": 8, "y": 176 if bottom else 6, "w": SIZE - 16, "h": 58},
            "position": "bottom" if bottom else "top",
        }

    desk = {"templates": [entry(n, i) for i, n in enumerate(DESK_TEMPLATES)]}
    # The full catalog leaves caption_box out so the default top/bottom band applies.
    full = {
        "templates": [
            {"name": n, "images": paths[n], "position": "bottom" if i % 2 else "top"}
            for i, n in enumerate(FULL_TEMPLATES)
        ]
    }
    (DATA / "catalog.json").write_text(json.dumps(desk, indent=2) + "\n")
    (DATA / "catalog_full.json").write_text(json.dumps(full, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Synthetic captions. Each template has a few phrase frames with slots.

SLOTS = {
    "thing": ["pizza", "coffee", "homework", "wifi", "weekend", "vacation", "exam", "phone", "laptop", "game",
              "party", "movie", "pasta", "bus", "train", "meeting", "project", "code", "bug", "deadline",
              "sandwich", "password", "email", "birthday", "salary", "cat", "dog", "car", "bike", "concert"],
    "place": ["work", "school", "home", "the gym", "the office", "the beach", "the store", "class", "the library",
              "the airport", "the party", "the kitchen"],
    "person": ["boss", "teacher", "mom", "dad", "friend", "cousin", "neighbor", "roommate", "crush", "brother",
               "sister", "coworker"],
    "verb": ["find", "fix", "finish", "win", "eat", "open", "lose", "forget", "miss", "break", "buy", "cook",
             "clean", "call", "watch", "sell", "build", "write", "read", "pass"],
    "ving": ["studying", "working", "coding", "cooking", "running", "sleeping", "driving", "shopping",
             "gaming", "dancing", "singing", "waiting"],
    "adj": ["first", "last", "new", "old", "free", "perfect", "tiny", "huge", "cold", "hot", "quiet", "lucky"],
}

FRAMES = {
    "Success Kid": [
        "when you {verb} your {adj} {thing}",
        "finally {verb} the {thing} at {place}",
        "late to {place} and {person} was even later",
        "{verb} the {adj} {thing} on the first try",
        "when your {person} gives you a free {thing}",
        "got to {place} and the {thing} was ready",
    ],
    "Bad Luck Brian": [
        "buys a {adj} {thing} it breaks the same day",
        "goes to {place} forgets the {thing}",
        "finally gets a {thing} {person} takes it",
        "tries to {verb} the {thing} loses the {thing}",
        "wins a {adj} {thing} at {place} it is stolen",
        "studies all night for the {thing} wrong exam",
    ],
    "One Does Not Simply": [
        "one does not simply {verb} the {thing}",
        "one does not simply walk into {place}",
        "one does not simply stop {ving}",
        "one does not simply {verb} one {thing}",
        "one does not simply ignore the {person}",
    ],
    "Matrix Morpheus": [
        "what if i told you the {thing} is a lie",
        "what if i told you {place} is optional",
        "what if i told you you can {verb} the {thing}",
        "what if i told you your {person} was {ving}",
        "what if i told you the {adj} {thing} never existed",
    ],
    "Futurama Fry": [
        "not sure if {ving} or just {ving}",
        "not sure if {person} is joking or serious",
        "not sure if {adj} {thing} or {adj} {thing}",
        "not sure if the {thing} is broken or i am",
        "not sure if i should {verb} the {thing}",
    ],
    "Grumpy Cat": [
        "i had fun once it was awful",
        "you want me to {verb} the {thing} no",
        "{adj} {thing} at {place} how about no",
        "i tried {ving} once it was terrible",
        "happy {thing} day said nobody",
        "your {thing} is bad and you should feel bad",
    ],
    "Leonardo Dicaprio Cheers": [
        "cheers to the {adj} {thing}",
        "cheers to us making the {thing} bright",
        "to those who {verb} the {thing} every day",
        "here is to the {person} who brought the {thing}",
        "cheers to {ving} at {place}",
    ],
    "Waiting Skeleton": [
        "waiting for the {thing} to load",
        "me waiting for my {person} to {verb} the {thing}",
        "still waiting for the {adj} {thing}",
        "waiting for {place} to open",
        "waiting for the {person} to reply",
    ],
}

# Captions quoted from the dataset sample table; kept verbatim.
QUOTED = {
    "Leonardo Dicaprio Cheers": [
        "to those who have been fortunate enough to have known true love",
        "cheers to us making the future bright",
        "when you see your cousin at a family gathering",
    ],
    "Success Kid": [
        "carries the laundry didn't drop a single sock",
        "when you win your first fortnite game",
        "late to work and boss was even later",
        "when she gives you her phone number",
    ],
}

PER_TEMPLATE = 90


def fill(frame, rng):
    out = frame
    while "{" in out:
        m = re.search(r"\{(\w+)\}", out)
        out = out[: m.start()] + rng.choice(SLOTS[m.group(1)]) + out[m.end():]
    return out


def write_corpus():
    rng = random.Random(SEED + 1)
    lines = []
    for name in DESK_TEMPLATES:
        seen = set(QUOTED.get(name, []))
        caps = list(QUOTED.get(name, []))
        while len(caps) < PER_TEMPLATE:
            c = fill(rng.choice(FRAMES[name]), rng)
            if c not in seen:
                seen.add(c)
                caps.append(c)
        lines += [{"template": name, "caption": c} for c in caps]
    rng.shuffle(lines)
    with open(DATA / "corpus.jsonl", "w") as f:
        for l in lines:
            f.write(json.dumps(l) + "\n")
    return lines


# ---------------------------------------------------------------------------
# Lexicons.

TAGS = {
    "DET": "the a an this that these those every each some any no my your his her its our their one all".split(),
    "ADP": "to at in on of for from with by about into over after before under around than as like".split(),
    "PRON": "i you he she it we they me him us them who what nobody someone everyone myself yourself".split(),
    "ADV": "not just still finally even later never once very so too also really only again how here there "
           "just always sometimes every_day simply".split(),
    "VERB": ("is are was were be been am do does did have has had can could should would will shall may might "
             "must get gets got go goes went walk walks want wants tried try tries told tell said say buy buys "
             "find fix finish win wins eat open lose loses forget forgets miss break breaks sell build write read "
             "pass cook clean call watch stop ignore existed load reply brought takes take gives give see carries "
             "drop make making feel known studies wait waiting thought think let run").split(),
    "ADJ": ("first last new old free perfect tiny huge cold hot quiet lucky bad good great happy sad awful "
            "terrible wrong serious broken optional bright true single same fortunate enough ready "
            "funny best worst little big").split(),
    "NUM": "two three four five ten hundred thousand".split(),
    "OTHER": "and or but if when then because while so no yes".split(),
}

SUFFIX_RULES = [
    ("ing", "VERB"), ("ed", "VERB"), ("ize", "VERB"), ("ise", "VERB"),
    ("ly", "ADV"),
    ("ous", "ADJ"), ("ful", "ADJ"), ("less", "ADJ"), ("able", "ADJ"), ("ible", "ADJ"), ("ive", "ADJ"),
    ("al", "ADJ"), ("ic", "ADJ"),
    ("tion", "NOUN"), ("sion", "NOUN"), ("ness", "NOUN"), ("ment", "NOUN"), ("ity", "NOUN"), ("er", "NOUN"),
]


def write_tags():
    seen = {}
    for tag, words in TAGS.items():
        for w in words:
            w = w.replace("_", " ")
            if " " in w or w in seen:
                continue
            seen[w] = tag
    lines = ["# word<TAB>TAG; unlisted words fall through to the suffix rules, then NOUN"]
    lines += [f"{w}\t{t}" for w, t in sorted(seen.items())]
    lines.append("#suffix")
    lines += [f"{s}\t{t}" for s, t in SUFFIX_RULES]
    (DATA / "lexicon").mkdir(parents=True, exist_ok=True)
    (DATA / "lexicon" / "tags.tsv").write_text("\n".join(lines) + "\n")


SENTIMENT = {
    # positive
    "good": 1.9, "great": 3.1, "happy": 2.7, "love": 3.2, "loved": 2.9, "like": 1.5, "liked": 1.8, "nice": 1.8,
    "awesome": 3.1, "amazing": 2.8, "best": 3.2, "better": 1.9, "win": 2.8, "wins": 2.7, "won": 2.7,
    "winner": 2.8, "success": 2.7, "successful": 2.8, "lucky": 1.9, "fun": 2.3, "funny": 1.9, "glad": 2.0,
    "joy": 2.8, "smile": 1.5, "laugh": 2.6, "beautiful": 2.9, "bright": 1.9, "free": 2.3, "perfect": 2.7,
    "fortunate": 1.9, "cheers": 2.1, "celebrate": 2.7, "party": 1.7, "friend": 2.2, "friends": 2.1,
    "hope": 1.9, "hopeful": 2.0, "save": 2.2, "safe": 1.9, "thanks": 1.9, "thank": 1.5, "welcome": 2.0,
    "proud": 2.1, "peace": 2.5, "calm": 1.3, "cool": 1.3, "kind": 2.4, "helpful": 1.8, "help": 1.7,
    "brave": 2.4, "strong": 2.3, "healthy": 1.7, "health": 1.2, "wonderful": 2.7, "excellent": 2.7,
    "excited": 1.4, "fantastic": 2.6, "enjoy": 2.2, "enjoyed": 2.3, "fresh": 1.3, "ready": 1.0, "true": 1.7,
    "trust": 2.3, "yay": 2.4, "yes": 1.7, "ok": 1.2, "okay": 0.9, "care": 2.2, "support": 1.7, "sweet": 2.0,
    "gift": 1.9, "bonus": 2.5, "finally": 0.9, "solved": 1.8, "victory": 2.8, "together": 1.2, "win-win": 2.0,
    "fine": 0.8, "pleasant": 2.3, "relax": 1.9, "relief": 1.5, "easy": 1.9, "favorite": 2.0, "cute": 2.0,
    "delicious": 2.7, "vacation": 1.9, "weekend": 1.0, "holiday": 1.7, "birthday": 1.3,
    # negative
    "bad": -2.5, "worst": -3.1, "worse": -2.1, "awful": -2.0, "terrible": -2.1, "horrible": -2.5,
    "hate": -2.7, "hated": -3.2, "sad": -2.1, "angry": -2.3, "mad": -2.2, "cry": -2.1, "crying": -2.1,
    "lose": -1.6, "loses": -1.3, "lost": -1.3, "loss": -1.3, "fail": -2.5, "failed": -2.3, "failure": -2.3,
    "broken": -1.8, "break": -0.6, "breaks": -1.0, "wrong": -2.1, "stolen": -2.2, "steal": -2.2,
    "sick": -2.3, "ill": -1.8, "disease": -1.7, "virus": -1.6, "corona": -1.0, "pandemic": -1.9,
    "death": -2.9, "dead": -3.3, "die": -2.9, "kill": -3.7, "killed": -3.5, "war": -2.9, "fear": -2.2,
    "afraid": -2.0, "scared": -1.9, "panic": -2.3, "worry": -1.9, "worried": -1.2, "pain": -2.3,
    "hurt": -2.4, "problem": -1.7, "problems": -1.7, "trouble": -1.7, "stress": -1.8, "stressed": -1.4,
    "tired": -1.9, "bored": -1.1, "boring": -1.3, "annoying": -1.7, "annoyed": -1.6, "ugly": -2.3,
    "stupid": -2.4, "disaster": -3.1, "crash": -1.7, "late": -0.8, "forget": -0.9, "forgets": -0.9,
    "miss": -0.6, "missed": -1.2, "alone": -1.0, "lonely": -1.5, "poor": -2.1, "no": -1.2, "nobody": -0.5,
    "never": -0.4, "cold": -0.5, "bug": -0.7, "deadline": -0.8, "exam": -0.6, "lie": -1.6, "liar": -2.4,
    "cheat": -2.0, "mess": -1.5, "ruin": -2.3, "ruined": -2.3, "hell": -3.6, "damn": -1.7, "ugh": -1.8,
    "sorry": -0.3, "shame": -2.1, "guilty": -1.8, "jealous": -2.0, "rude": -2.0, "toxic": -2.4,
    "crisis": -3.1, "danger": -2.4, "dangerous": -2.1, "hungry": -0.9, "broke": -1.8, "fired": -2.6,
    "quarantine": -0.9, "lockdown": -1.2, "nope": -1.2, "facepalm": -1.4, "skeptical": -0.8,
}


def write_sentiment():
    lines = ["# word<TAB>valence (-4 .. 4)"]
    lines += [f"{w}\t{v}" for w, v in sorted(SENTIMENT.items())]
    (DATA / "lexicon" / "sentiment.tsv").write_text("\n".join(lines) + "\n")


def write_samples(corpus):
    out = DATA / "samples"
    out.mkdir(parents=True, exist_ok=True)
    (out / "tweets.txt").write_text("\n".join([
        "Please save the world from Corona",
        "finally finished my homework before the deadline",
        "the wifi is broken again and i hate it",
        "waiting for the bus in the cold",
        "cheers to a great weekend with friends",
        "my laptop died during the exam",
    ]) + "\n")
    # Contingency (yes/yes=20, yes/no=5, no/yes=10, no/no=15) on the likes column.
    rows = ["meme_id,rater_id,coherence,relevance,likes"]
    cells = [(1, 1)] * 20 + [(1, 0)] * 5 + [(0, 1)] * 10 + [(0, 0)] * 15
    rng = random.Random(SEED + 2)
    for i, (a, b) in enumerate(cells):
        rows.append(f"m{i:02d},r1,{rng.randint(1, 4)},{rng.randint(1, 4)},{a}")
        rows.append(f"m{i:02d},r2,{rng.randint(1, 4)},{rng.randint(1, 4)},{b}")
    (out / "ratings.csv").write_text("\n".join(rows) + "\n")


def main():
    paths = write_images()
    write_catalogs(paths)
    corpus = write_corpus()
    write_tags()
    write_sentiment()
    write_samples(corpus)
    print(f"wrote {len(corpus)} captions, {len(paths)} templates")


if __name__ == "__main__":
    main()
