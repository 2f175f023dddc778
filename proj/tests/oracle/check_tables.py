#!/usr/bin/env python3
"""Fails when the committed truth tables differ from what the oracle produces."""
import json
import sys

import truth_tables

bad = 0
for part in truth_tables.FUNCTIONS:
    committed = json.loads((truth_tables.OUT / f"{part}.json").read_text())
    if committed != truth_tables.table(part):
        print(f"{part}: committed table is stale; rerun tests/oracle/truth_tables.py")
        bad += 1
print(f"{len(truth_tables.FUNCTIONS) - bad}/{len(truth_tables.FUNCTIONS)} tables current")
sys.exit(1 if bad else 0)
