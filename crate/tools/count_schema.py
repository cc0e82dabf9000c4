#!/usr/bin/env python3
"""Count a schema-definition file and print its manifest.

perTier counts presented leaves: a top-level element with a sub-schema value
type is replaced by the leaves of that sub-schema (recursively), each leaf
taking the weakest tier along its path.
"""
import json, sys
from collections import Counter

RANK = {"optional": 0, "recommended": 1, "mandatory": 2}
TIERS = ["mandatory", "recommended", "optional"]


def main(path):
    s = json.load(open(path))
    subs = {x["id"]: x for x in s["subSchemas"]}

    def leaves(vt, tier):
        if isinstance(vt, dict):
            out = []
            for f in subs[vt["subSchemaRef"]]["fields"]:
                eff = min(tier, f["tier"], key=lambda t: RANK[t])
                out += leaves(f["valueType"], eff)
            return out
        return [tier]

    presented = Counter()
    top = Counter()
    declared = Counter()
    area = Counter()
    prov = Counter()
    for e in s["elements"]:
        presented.update(leaves(e["valueType"], e["tier"]))
        top[e["tier"]] += 1
        declared[e["tier"]] += 1
        area[e["area"]] += 1
        prov[e["provenance"]] += 1
    nfields = 0
    for sub in s["subSchemas"]:
        for f in sub["fields"]:
            nfields += 1
            declared[f["tier"]] += 1
            prov[f["provenance"]] += 1
    manifest = {
        "schemaId": s["id"],
        "areaCount": len(s["areas"]),
        "topLevelCount": len(s["elements"]),
        "subSchemaCount": len(s["subSchemas"]),
        "subSchemaFieldCount": nfields,
        "perTier": {t: presented[t] for t in TIERS},
        "topLevelPerTier": {t: top[t] for t in TIERS},
        "declaredPerTier": {t: declared[t] for t in TIERS},
        "perArea": {a["id"]: area[a["id"]] for a in s["areas"]},
        "perProvenance": dict(sorted(prov.items())),
    }
    print(json.dumps(manifest, indent=2))


main(sys.argv[1])
