#!/usr/bin/env python3
"""Fail if any rvfldl module references a singular-value-based routine.

The scan walks the AST of every module under ``src/rvfldl`` and reports

* attribute accesses and imported names matching a banned routine
  (``svd``, ``pinv``, ``lstsq``, ...), wherever they come from;
* ``norm``/``cond`` calls whose ``ord`` argument selects a spectral norm
  (``2``, ``-2``, ``"nuc"``), which numpy evaluates with an SVD;
* imports of third-party packages outside the allowed set.

Run from the repository root; exits 1 and prints one line per finding.
"""

from __future__ import annotations

import ast
import sys
from pathlib import Path

BANNED = frozenset({
    "svd", "svdvals", "pinv", "pinvh", "lstsq", "matrix_rank", "cond", "orth", "null_space",
    "subspace_angles", "diagsvd", "svds", "polar", "TruncatedSVD", "randomized_svd",
})
SPECTRAL_ORDS = (2, -2, "nuc")
ALLOWED_IMPORTS = frozenset({"numpy", "scipy", "jsonschema"})
STDLIB = frozenset(sys.stdlib_module_names)
PACKAGE = Path(__file__).resolve().parents[1] / "src" / "rvfldl"


def _spectral_ord(call: ast.Call) -> bool:
    args = list(call.args[1:2]) + [k.value for k in call.keywords if k.arg == "ord"]
    for a in args:
        if isinstance(a, ast.Constant) and a.value in SPECTRAL_ORDS:
            return True
        if isinstance(a, ast.UnaryOp) and isinstance(a.op, ast.USub) and isinstance(a.operand, ast.Constant) \
                and -a.operand.value in SPECTRAL_ORDS:
            return True
    return False


def scan_source(source: str, name: str = "<string>") -> list[str]:
    findings = []
    for node in ast.walk(ast.parse(source, filename=name)):
        where = f"{name}:{getattr(node, 'lineno', 0)}"
        if isinstance(node, ast.Attribute) and node.attr in BANNED:
            findings.append(f"{where}: uses .{node.attr}")
        elif isinstance(node, ast.Name) and node.id in BANNED:
            findings.append(f"{where}: uses {node.id}")
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            if isinstance(node, ast.ImportFrom):
                if node.level == 0 and node.module:
                    top = node.module.split(".")[0]
                    if top not in STDLIB and top not in ALLOWED_IMPORTS:
                        findings.append(f"{where}: imports third-party package {top}")
                for alias in node.names:
                    if alias.name in BANNED:
                        findings.append(f"{where}: imports {alias.name}")
            else:
                for alias in node.names:
                    top = alias.name.split(".")[0]
                    if top not in STDLIB and top not in ALLOWED_IMPORTS:
                        findings.append(f"{where}: imports third-party package {top}")
        elif isinstance(node, ast.Call):
            fn = node.func
            fname = fn.attr if isinstance(fn, ast.Attribute) else getattr(fn, "id", "")
            if fname == "norm" and _spectral_ord(node):
                findings.append(f"{where}: spectral norm (SVD-based)")
    return findings


def scan_package(root: Path = PACKAGE) -> list[str]:
    findings = []
    for path in sorted(root.rglob("*.py")):
        findings += scan_source(path.read_text("utf-8"), str(path.relative_to(root.parent)))
    return findings


def main() -> int:
    findings = scan_package()
    for f in findings:
        print(f)
    if not findings:
        print(f"no singular-value routines in {PACKAGE}")
    return 1 if findings else 0


if __name__ == "__main__":
    sys.exit(main())
