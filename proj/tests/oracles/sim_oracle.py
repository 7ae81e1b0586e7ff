"""Exhaustive scan of a sim universe file, independent of the C++ code.

Usage:
  sim_oracle.py UNIVERSE QUERY_JSON            -> ground-truth counts
  sim_oracle.py UNIVERSE QUERY_JSON ASSETS     -> recall / precision of a run's assets.jsonl

The query is given as JSON: a list of [field, [values]] conjuncts.
"""
import json
import sys


def load(path):
    with open(path, encoding="utf-8") as f:
        lines = [json.loads(l) for l in f if l.strip()]
    header, entities = lines[0], lines[1:]
    return header, entities


def matches(entity, conjuncts):
    return all(entity[field] in values for field, values in conjuncts)


def main():
    header, entities = load(sys.argv[1])
    conjuncts = json.loads(sys.argv[2])
    threshold = header["visibility_threshold"]
    truth = [e for e in entities if matches(e, conjuncts)]
    if len(sys.argv) == 3:
        zh_only = [e for e in truth
                   if e["visibility"].get("zh", 0) >= threshold and e["visibility"].get("en", 0) < threshold]
        print(json.dumps({"truth": len(truth), "zh_only": len(zh_only)}))
        return
    alias_to_id = {}
    for e in entities:
        for a in e["aliases"]:
            alias_to_id[" ".join(a["text"].lower().split())] = e["id"]
    truth_ids = {e["id"] for e in truth}
    by_id = {e["id"]: e for e in entities}
    predicted = []
    with open(sys.argv[3], encoding="utf-8") as f:
        for line in f:
            if line.strip():
                predicted.append(json.loads(line)["canonical_name"])
    resolved = [alias_to_id.get(" ".join(p.lower().split())) for p in predicted]
    found = {r for r in resolved if r in truth_ids}
    correct = sum(1 for r in resolved if r is not None and matches(by_id[r], conjuncts))
    print(json.dumps({"truth": len(truth_ids), "found": len(found),
                      "predicted": len(predicted), "correct": correct}))


if __name__ == "__main__":
    main()
