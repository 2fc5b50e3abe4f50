"""One program per catalog row, with its answer on the kitchen fixture."""

CASES = [
    ("queryGlobal", "select: scene/query: location", "kitchen"),
    ("verifyGlobal", "select: scene/verify location: kitchen", "yes"),
    ("chooseGlobal", "select: scene/choose location: kitchen|beach", "kitchen"),
    ("queryAttr", "select: apple/query: color", "red"),
    ("verifyAttr", "select: apple/verify color: red", "yes"),
    ("verifyAttrs", "select: apple/verify color: red/select: apple/verify size: small/and", "yes"),
    ("chooseAttr", "select: plate/choose color: white|red", "white"),
    ("exist", "select: banana/exist", "yes"),
    ("existRel", "select: table/relate(subject, on): apple/exist", "yes"),
    ("logicOr", "select: banana/exist/select: car/exist/or", "yes"),
    ("logicAnd", "select: apple/exist/select: car/exist/and", "no"),
    ("queryObject", "select: fruit/filter: red/query: name", "apple"),
    ("chooseObject", "select: fruit/filter: yellow/choose: banana|apple", "banana"),
    ("queryRel", "select: apple/relate(object, on): _/query: name", "table"),
    ("verifyRel", "select: banana/verifyRel(on): plate", "yes"),
    ("chooseRel", "select: apple/chooseRel(to the left of|to the right of): plate", "to the left of"),
    ("chooseObjRel", "select: girl/relate(object, wearing): _/choose: shirt|hat", "shirt"),
    ("compare", "select: girl/select: boy/compare height: taller", "girl"),
    ("common", "select: table/select: plate/common", "shape"),
    ("twoSame", "select: girl/relate(object, wearing): shirt/select: boy/relate(object, wearing): shirt/same color", "yes"),
    ("twoDiff", "select: apple/select: banana/different color", "yes"),
    ("allSame", "select: shirt/same color", "yes"),
    ("allDiff", "select: fruit/different color", "yes"),
]
