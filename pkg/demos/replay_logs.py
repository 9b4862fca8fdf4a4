"""
Reproducible runs through the command-line interface.

Every ``ncsim`` run writes a JSON-lines log holding its full configuration,
the hashes of its input files, one line per record and a summary. Replaying
the log re-executes the configuration and compares the output byte for byte.

Run with ``python demos/replay_logs.py``.
"""
import tempfile
from pathlib import Path

from ncsim import cli

with tempfile.TemporaryDirectory() as tmp:
    log = Path(tmp) / "phiplus.jsonl"
    cli.dispatch(["exp", "phiplus", "--engine", "ck", "--shots", "2000", "--seed", "7",
                  "--log", str(log), "--out-dir", tmp])
    print(f"log has {len(log.read_text().splitlines())} lines")
    print("replay exit code:", cli.dispatch(["replay", str(log)]))

    lines = log.read_text().splitlines()
    lines[1] = lines[1].replace('"counts":[', '"counts":[1')
    log.write_text("\n".join(lines) + "\n")
    print("after editing a record:", cli.dispatch(["replay", str(log)]))
