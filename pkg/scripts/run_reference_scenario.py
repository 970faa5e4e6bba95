#!/usr/bin/env python3
"""End-to-end reference experiment: writes every CSV artifact to out/reference.

Equivalent to `bfwave full --config <reference config> --out out/reference`; the
config JSON is also dropped next to the outputs so the CLI route can be
replayed directly.
"""

import json
import sys
from pathlib import Path

from bfwave.cli import cmd_full, config_to_dict
from bfwave.scenarios import reference_scenario


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/reference")
    out.mkdir(parents=True, exist_ok=True)
    cfg_path = out / "config.json"
    with open(cfg_path, "w") as fh:
        json.dump(config_to_dict(reference_scenario()), fh, indent=2)
        fh.write("\n")
    return cmd_full(cfg_path, out)


if __name__ == "__main__":
    sys.exit(main())
