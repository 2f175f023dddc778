#!/usr/bin/env python3
"""Reference function tables for the combinational catalog parts.

Written from the TTL datasheets, independently of the C++ models: only pin
names are read from core/data/parts, never the model terms. Output goes to
tests/fixtures/truth_tables/<part>.json and is committed.
"""
import itertools
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[2]
PARTS = ROOT / "core" / "data" / "parts"
OUT = ROOT / "tests" / "fixtures" / "truth_tables"


def quad(op):
    def f(v):
        return {f"{g}Y": op(v[f"{g}A"], v[f"{g}B"]) for g in range(1, 5)}
    return f


def hex_inverter(v):
    return {f"{g}Y": 1 - v[f"{g}A"] for g in range(1, 7)}


def decoder138(v):
    enabled = v["G1"] == 1 and v["G2A"] == 0 and v["G2B"] == 0
    sel = v["A0"] + 2 * v["A1"] + 4 * v["A2"]
    return {f"Y{i}": 0 if enabled and i == sel else 1 for i in range(8)}


def mux151(v):
    if v["G"] == 1:
        return {"Y": 0, "W": 1}
    y = v["D%d" % (v["A"] + 2 * v["B"] + 4 * v["C"])]
    return {"Y": y, "W": 1 - y}


def mux153(v):
    sel = v["A"] + 2 * v["B"]
    out = {}
    for g in (1, 2):
        out[f"{g}Y"] = 0 if v[f"{g}G"] == 1 else v[f"{g}C{sel}"]
    return out


def adder283(v):
    a = sum(v[f"A{i}"] << (i - 1) for i in range(1, 5))
    b = sum(v[f"B{i}"] << (i - 1) for i in range(1, 5))
    s = a + b + v["C0"]
    out = {f"S{i}": (s >> (i - 1)) & 1 for i in range(1, 5)}
    out["C4"] = (s >> 4) & 1
    return out


# 7448 segment font (a..g), digits 0-15 as printed in the datasheet.
FONT_7448 = [
    "1111110", "0110000", "1101101", "1111001", "0110011", "1011011", "0011111", "1110000",
    "1111111", "1110011", "0001101", "0011001", "0100011", "1001011", "0001111", "0000000",
]


def bcd7448(v):
    segs = "ABCDEFG"
    if v["BI"] == 0:
        pattern = "0000000"
    elif v["LT"] == 0:
        pattern = "1111111"
    else:
        n = v["A"] + 2 * v["B"] + 4 * v["C"] + 8 * v["D"]
        pattern = "0000000" if (v["RBI"] == 0 and n == 0) else FONT_7448[n]
    return {f"SEG_{s}": int(bit) for s, bit in zip(segs, pattern)}


FUNCTIONS = {
    "74LS00": quad(lambda a, b: 1 - (a & b)),
    "74LS02": quad(lambda a, b: 1 - (a | b)),
    "74LS04": hex_inverter,
    "74LS08": quad(lambda a, b: a & b),
    "74LS32": quad(lambda a, b: a | b),
    "74LS86": quad(lambda a, b: a ^ b),
    "74LS138": decoder138,
    "74LS151": mux151,
    "74LS153": mux153,
    "74LS283": adder283,
    "7448": bcd7448,
}


def table(part):
    model = json.loads((PARTS / f"{part}.json").read_text())
    inputs = [p["name"] for p in model["pins"] if p["direction"] == "INPUT"]
    outputs = [p["name"] for p in model["pins"] if p["direction"] == "OUTPUT"]
    rows = []
    for bits in itertools.product((0, 1), repeat=len(inputs)):
        values = dict(zip(inputs, bits))
        result = FUNCTIONS[part](values)
        if set(result) != set(outputs):
            sys.exit(f"{part}: oracle outputs {sorted(result)} differ from pins {sorted(outputs)}")
        rows.append("".join(map(str, bits)) + ":" + "".join(str(result[o]) for o in outputs))
    return {"part": part, "inputs": inputs, "outputs": outputs, "rows": rows}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for part in FUNCTIONS:
        (OUT / f"{part}.json").write_text(json.dumps(table(part), indent=1) + "\n")
    print(f"wrote {len(FUNCTIONS)} tables to {OUT}")


if __name__ == "__main__":
    main()
