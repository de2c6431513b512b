#!/usr/bin/env python3
"""Assemble corpus/src/*.wat into corpus/*.wasm (needs the wasmtime package)."""
import pathlib
import sys

import wasmtime

root = pathlib.Path(__file__).resolve().parent.parent / "corpus"
changed = 0
for wat in sorted((root / "src").glob("*.wat")):
    out = root / (wat.stem + ".wasm")
    data = wasmtime.wat2wasm(wat.read_text())
    if not out.exists() or out.read_bytes() != data:
        out.write_bytes(data)
        changed += 1
        print("wrote", out.name)
print(f"{changed} file(s) updated", file=sys.stderr)
