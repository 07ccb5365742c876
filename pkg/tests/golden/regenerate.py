"""Rewrite the golden outputs from configs/*.json.  Run only after an intended change."""

import json
import pathlib
import sys

from ddexchange.cli import RunConfig, run

ROOT = pathlib.Path(__file__).resolve().parents[2]
HERE = pathlib.Path(__file__).resolve().parent

if __name__ == "__main__":
    names = sys.argv[1:]
    for path in sorted((ROOT / "configs").glob("*.json")):
        if names and path.stem not in names:
            continue
        cfg = RunConfig.from_dict(json.loads(path.read_text()))
        cfg.output = str(HERE / f"{path.stem}.csv")
        print(path.name, run(cfg), file=sys.stderr)
