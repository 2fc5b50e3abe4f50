"""Deterministic synthesis of the bundled demo scene graphs.

The generated records use the raw public layout, including the kind of
noise real annotations carry (synonyms, typos, capitalization, unknown
words), so the demo corpus also exercises normalization.
"""

from __future__ import annotations

import random

# concept -> {attribute type: candidate values}
ATTRS: dict[str, dict[str, list[str]]] = {
    "apple": {"color": ["red", "green", "yellow"], "size": ["small", "large"], "shape": ["round"]},
    "banana": {"color": ["yellow", "green", "brown"], "size": ["small", "large"]},
    "orange": {"shape": ["round"], "size": ["small", "large"]},
    "pear": {"color": ["green", "yellow"]},
    "lemon": {"color": ["yellow"], "shape": ["oval", "round"]},
    "pizza": {"shape": ["round", "square"], "size": ["large", "small"]},
    "cake": {"color": ["white", "brown", "pink"], "shape": ["round", "square"]},
    "sandwich": {"size": ["small", "large"], "shape": ["square"]},
    "donut": {"color": ["pink", "brown"], "shape": ["round"]},
    "dog": {"color": ["brown", "black", "white"], "size": ["small", "large"], "age": ["young", "old"], "activity": ["sitting", "running", "standing"]},
    "cat": {"color": ["black", "gray", "white"], "size": ["small", "large"], "activity": ["sitting", "standing"]},
    "horse": {"color": ["brown", "white", "black"], "size": ["large"], "activity": ["standing", "running", "walking"]},
    "bear": {"color": ["brown", "black", "white"], "size": ["large", "small"], "age": ["young", "old"]},
    "giraffe": {"color": ["brown"], "height": ["tall", "short"], "age": ["young", "old"]},
    "elephant": {"color": ["gray"], "size": ["large", "small"], "age": ["young", "old"]},
    "bird": {"color": ["black", "white", "blue"], "size": ["small", "tiny"]},
    "cow": {"color": ["brown", "black", "white"], "activity": ["standing", "walking"]},
    "zebra": {"size": ["large", "small"], "activity": ["standing", "walking"]},
    "man": {"age": ["young", "old"], "height": ["tall", "short"], "activity": ["standing", "walking", "sitting"]},
    "woman": {"age": ["young", "old"], "height": ["tall", "short"], "activity": ["standing", "walking", "sitting"]},
    "boy": {"age": ["young"], "height": ["short", "tall"], "activity": ["running", "standing", "sitting"]},
    "girl": {"age": ["young"], "height": ["short", "tall"], "activity": ["running", "standing", "sitting"]},
    "player": {"height": ["tall", "short"], "activity": ["running", "standing"]},
    "shirt": {"color": ["white", "blue", "red", "black", "green"]},
    "dress": {"color": ["pink", "blue", "white", "purple"]},
    "hat": {"color": ["black", "white", "red", "blue"]},
    "jacket": {"color": ["black", "blue", "brown"], "material": ["leather"]},
    "pants": {"color": ["blue", "black", "gray"]},
    "shoe": {"color": ["white", "black", "brown"], "material": ["leather"]},
    "coat": {"color": ["black", "brown", "gray"]},
    "tie": {"color": ["red", "blue", "black"]},
    "table": {"color": ["brown", "white"], "material": ["wooden", "metal", "glass"], "shape": ["square", "round", "rectangular", "oval"]},
    "chair": {"color": ["brown", "black", "white"], "material": ["wooden", "metal", "plastic"]},
    "bench": {"color": ["brown", "green"], "material": ["wooden", "metal"]},
    "couch": {"color": ["brown", "gray", "blue"], "material": ["leather"]},
    "shelf": {"material": ["wooden", "metal"], "color": ["white", "brown"]},
    "car": {"color": ["red", "blue", "white", "black", "silver"], "size": ["small", "large"], "material": ["metal"]},
    "bus": {"color": ["red", "white", "yellow", "blue"], "size": ["large"]},
    "truck": {"color": ["white", "red", "blue"], "size": ["large", "small"]},
    "bicycle": {"color": ["black", "red", "blue"], "material": ["metal"]},
    "boat": {"color": ["white", "blue", "red"], "size": ["small", "large"], "material": ["wooden", "metal"]},
    "plate": {"color": ["white", "blue"], "shape": ["round", "square"], "material": ["glass", "plastic"]},
    "cup": {"color": ["white", "blue", "red"], "material": ["glass", "plastic"]},
    "bowl": {"color": ["white", "blue", "brown"], "shape": ["round"], "material": ["glass", "wooden", "plastic"]},
    "bottle": {"color": ["green", "brown", "white"], "material": ["glass", "plastic"]},
    "tree": {"color": ["green", "brown"], "height": ["tall", "short"]},
    "flower": {"color": ["pink", "yellow", "red", "purple", "white"], "size": ["small"]},
    "grass": {"color": ["green", "brown"]},
    "bush": {"color": ["green"], "size": ["small", "large"]},
    "building": {"color": ["white", "brown", "gray", "red"], "height": ["tall", "short"]},
    "fence": {"color": ["white", "brown"], "material": ["wooden", "metal"]},
    "wall": {"color": ["white", "gray", "yellow"]},
    "window": {"material": ["glass"], "shape": ["square", "rectangular"]},
    "door": {"color": ["brown", "white", "red"], "material": ["wooden", "metal"]},
    "sign": {"color": ["red", "white", "green", "blue"], "shape": ["square", "round", "rectangular"]},
    "pole": {"color": ["gray", "black"], "material": ["metal", "wooden"]},
    "hand": {},
    "tail": {"color": ["brown", "black"]},
    "head": {},
    "hair": {"color": ["brown", "black", "gray"]},
    "refrigerator": {"color": ["white", "silver"], "material": ["metal"]},
    "oven": {"color": ["black", "silver", "white"]},
    "sky": {"color": ["blue", "gray"]},
    "cloud": {"color": ["white", "gray"]},
    "snow": {"color": ["white"]},
    "water": {"color": ["blue"]},
    "sand": {"color": ["brown"]},
}

SCENES = {
    "kitchen": {
        "location": "kitchen",
        "weather": [],
        "core": ["table", "refrigerator", "plate", "cup"],
        "extra": ["apple", "apple", "banana", "orange", "bowl", "bottle", "chair", "chair", "cake", "pizza",
                  "sandwich", "woman", "man", "oven", "shelf", "donut", "lemon", "pear", "window", "cat"],
    },
    "street": {
        "location": "street",
        "weather": ["sunny", "cloudy", "rainy"],
        "core": ["car", "building", "man", "sky"],
        "extra": ["car", "bus", "truck", "bicycle", "woman", "sign", "pole", "tree", "dog", "window", "door",
                  "boy", "girl", "bench", "shirt", "hat", "jacket", "pants", "cloud"],
    },
    "beach": {
        "location": "beach",
        "weather": ["sunny", "cloudy"],
        "core": ["sand", "water", "sky"],
        "extra": ["boat", "boat", "man", "woman", "girl", "boy", "dog", "bird", "bird", "cloud", "shirt", "hat",
                  "dress", "bottle", "tree"],
    },
    "park": {
        "location": "park",
        "weather": ["sunny", "cloudy", "snowy"],
        "core": ["tree", "grass", "bench"],
        "extra": ["tree", "man", "woman", "boy", "girl", "dog", "dog", "bird", "flower", "flower", "bush", "fence",
                  "bicycle", "player", "shirt", "jacket", "coat", "hat", "snow", "cloud", "sky"],
    },
    "field": {
        "location": "field",
        "weather": ["sunny", "cloudy"],
        "core": ["grass", "sky"],
        "extra": ["horse", "horse", "cow", "cow", "giraffe", "giraffe", "zebra", "elephant", "elephant", "tree",
                  "fence", "man", "bird", "bear", "bear", "tail", "bush", "cloud"],
    },
    "dining": {
        "location": None,
        "weather": [],
        "core": ["table", "plate", "man"],
        "extra": ["pizza", "sandwich", "cup", "cup", "bottle", "bowl", "woman", "girl", "chair", "chair", "apple",
                  "banana", "cake", "shirt", "tie", "hand", "hair", "wall", "couch"],
    },
}

# Raw-token noise: the normalizer must map these back.
NOISE = {"man": ["guy", "Man"], "gray": ["grey"], "large": ["big"], "white": ["whtie", "White"],
         "table": ["tabel"], "banana": ["bananna"], "wooden": ["wodden"], "giraffe": ["giraff"]}
UNKNOWN_TOKENS = ["shiny", "blurry", "xqzw", "lit"]

PEOPLE = {"man", "woman", "boy", "girl", "player"}
CLOTHES = {"shirt", "dress", "hat", "jacket", "pants", "shoe", "coat", "tie"}
FOOD = {"apple", "banana", "orange", "pear", "lemon", "pizza", "cake", "sandwich", "donut"}
SUPPORTS = {"table", "plate", "shelf", "bowl", "bench", "chair", "couch"}
ANIMALS = {"dog", "cat", "horse", "bear", "giraffe", "elephant", "bird", "cow", "zebra"}
RIDEABLE = {"horse", "bicycle", "boat", "elephant"}
SKYWARD = {"sky", "cloud"}
GROUND = {"grass", "sand", "water", "snow"}
HANDHELD = {"cup", "bottle", "apple", "banana", "sandwich", "donut", "pizza"}


def _token(rng: random.Random, word: str) -> str:
    if word in NOISE and rng.random() < 0.15:
        return rng.choice(NOISE[word])
    return word


def _relations(rng: random.Random, names: dict[str, str]) -> list[tuple[str, str, str]]:
    ids = list(names)
    rels = []
    for s in ids:
        cs = names[s]
        for o in ids:
            if s == o:
                continue
            co = names[o]
            p = None
            if cs in FOOD and co in SUPPORTS - {"bench", "couch", "chair"}:
                p = "in" if co == "bowl" else "on"
            elif cs in {"cup", "bottle", "plate", "bowl"} and co in {"table", "shelf"}:
                p = "on"
            elif cs in PEOPLE and co in CLOTHES:
                p = "wearing"
            elif cs in PEOPLE and co in HANDHELD and rng.random() < 0.5:
                p = "holding"
            elif cs in PEOPLE and co in FOOD and rng.random() < 0.4:
                p = "eating"
            elif cs in PEOPLE and co in RIDEABLE and rng.random() < 0.5:
                p = "riding"
            elif cs in PEOPLE and co in {"bench", "chair", "couch"} and rng.random() < 0.6:
                p = "sitting on"
            elif cs in PEOPLE and co in ANIMALS and rng.random() < 0.2:
                p = "hugging"
            elif cs in PEOPLE | ANIMALS and rng.random() < 0.08:
                p = "looking at"
            elif cs == "bird" and co in {"tree", "fence", "pole", "building"}:
                p = "on"
            elif cs == "cat" and co in {"table", "chair", "couch"} and rng.random() < 0.5:
                p = rng.choice(["under", "on"])
            elif cs in ANIMALS and co in {"grass", "field", "water", "sand", "snow"}:
                p = "on" if co != "water" else "in"
            elif cs == "sign" and co == "pole":
                p = "attached to"
            elif cs == "window" and co == "building":
                p = "on"
            elif cs == "tail" and co in ANIMALS:
                p = "attached to"
            elif cs == "hand" and co in PEOPLE:
                p = "attached to"
            elif cs in {"car", "bus", "truck", "bicycle"} and co in {"building", "tree", "sign", "pole"} and rng.random() < 0.3:
                p = rng.choice(["near", "in front of"])
            elif cs in {"tree", "bush", "fence"} and co in ANIMALS | PEOPLE and rng.random() < 0.15:
                p = "behind"
            elif cs in ANIMALS and co in {"tree", "fence", "car", "bench"} and rng.random() < 0.25:
                p = "near"
            elif cs in {"chair"} and co == "table" and rng.random() < 0.5:
                p = "near"
            if p is not None:
                rels.append((s, p, o))
    # a person wears at most a few items; keep one wearer per garment
    worn: set[str] = set()
    out = []
    for s, p, o in rels:
        if p == "wearing":
            if o in worn:
                continue
            worn.add(o)
        out.append((s, p, o))
    return out


def synthesize_graph(rng: random.Random, image_id: str) -> dict:
    kind = rng.choice(sorted(SCENES))
    layout = SCENES[kind]
    width, height = rng.choice([(640, 480), (500, 375), (640, 427), (800, 600)])
    names = list(layout["core"]) + rng.sample(layout["extra"], rng.randint(5, min(10, len(layout["extra"]))))
    objects: dict[str, dict] = {}
    base = rng.randint(1000, 9000) * 100
    concept_of: dict[str, str] = {}
    for i, name in enumerate(names):
        oid = str(base + i)
        if name in SKYWARD:
            w = rng.randint(width // 4, width) if name == "sky" else rng.randint(width // 10, width // 4)
            h = rng.randint(height // 10, height // 5)
            x = rng.randint(0, width - w)
            y = 0 if name == "sky" else rng.randint(0, height // 6)
        elif name in GROUND:
            w = rng.randint(width // 2, width)
            h = rng.randint(height // 6, height // 3)
            x = rng.randint(0, width - w)
            y = height - h
        else:
            w = rng.randint(width // 12, width // 3)
            h = rng.randint(height // 12, height // 3)
            x = rng.randint(0, width - w)
            y = rng.randint(height // 6, height - h)
        attrs = []
        for t, values in sorted(ATTRS.get(name, {}).items()):
            if rng.random() < 0.75:
                attrs.append(_token(rng, rng.choice(values)))
        if rng.random() < 0.08:
            attrs.append(rng.choice(UNKNOWN_TOKENS))
        objects[oid] = {"name": _token(rng, name), "x": x, "y": y, "w": w, "h": h,
                        "attributes": attrs, "relations": []}
        concept_of[oid] = name
    for s, p, o in _relations(rng, concept_of):
        objects[s]["relations"].append({"name": p, "object": o})
    rec: dict = {"imageId": image_id, "width": width, "height": height}
    if layout["weather"] and rng.random() < 0.6:
        rec["weather"] = rng.choice(layout["weather"])
    if layout["location"] and rng.random() < 0.5:
        rec["location"] = layout["location"]
    rec["objects"] = objects
    return rec


def synthesize_demo_graphs(n: int = 50, seed: int = 7) -> list[dict]:
    rng = random.Random(seed)
    return [synthesize_graph(rng, f"demo{i:03d}") for i in range(n)]
