"""Generator-set files and small persistence helpers.

File format (``"schema": 1``)::

    {"dim": d, "denominator": s,
     "generators": [{"name": str, "num": [[int]], "power": k}, ...],
     "symmetrize": bool}

Entry (i, j) of a generator is ``num[i][j] / s**power`` (power defaults to 0).
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from growthlab.cayley import GeneratorSet, symmetrize
from growthlab.exact_linalg import ExactMatrix, SingularMatrixError, determinant, mat_inverse

FIXTURES = ("sl2_st", "solvable_2", "unipotent_t", "identity_2", "upper3_zhalf")


class GensetError(ValueError):
    """Invalid generator file.  ``code`` is one of malformed / dimension / singular / asymmetric."""

    exit_codes = {"malformed": 3, "dimension": 4, "singular": 5, "asymmetric": 6}

    def __init__(self, code: str, msg: str):
        super().__init__(msg)
        self.code = code

    @property
    def exit_code(self) -> int:
        return self.exit_codes[self.code]


def resolve_gens_path(ref: str | Path) -> Path:
    """A file path, or the name of a bundled fixture such as ``sl2_st``."""
    path = Path(ref)
    if path.exists():
        return path
    name = path.stem if path.suffix == ".json" else str(ref)
    if name in FIXTURES:
        return Path(str(resources.files("growthlab.fixtures").joinpath(f"{name}.json")))
    raise GensetError("malformed", f"no such generator file or fixture: {ref}")


def parse_genset(obj: dict) -> GeneratorSet:
    try:
        dim = int(obj["dim"])
        s = int(obj.get("denominator", 1))
        raw = obj["generators"]
        sym = bool(obj.get("symmetrize", True))
    except (KeyError, TypeError, ValueError) as exc:
        raise GensetError("malformed", f"malformed generator file: {exc}") from None
    if dim < 1 or s < 1 or not isinstance(raw, list) or not raw:
        raise GensetError("malformed", "need dim >= 1, denominator >= 1 and a nonempty generator list")
    gens, labels = [], []
    for i, g in enumerate(raw):
        try:
            rows = g["num"]
            power = int(g.get("power", 0))
            flat = [int(x) for row in rows for x in row]
        except (KeyError, TypeError, ValueError):
            raise GensetError("malformed", f"generator {i} is malformed") from None
        if len(rows) != dim or any(len(r) != dim for r in rows):
            raise GensetError("dimension", f"generator {i} is not {dim}x{dim}")
        if power < 0:
            raise GensetError("malformed", f"generator {i} has negative power")
        m = ExactMatrix(dim, flat, s**power)
        if determinant(m) == 0:
            raise GensetError("singular", f"singular generator at index {i}")
        gens.append(m)
        labels.append(str(g.get("name", f"g{i}")))
    gs = GeneratorSet(dim, tuple(gens), labels=tuple(labels), denominator=s)
    if sym:
        try:
            return symmetrize(gs)
        except SingularMatrixError as exc:  # pragma: no cover - determinant checked above
            raise GensetError("singular", str(exc)) from None
    present = set(gens)
    if any(mat_inverse(g) not in present for g in gens):
        raise GensetError("asymmetric", "symmetrize is false but the set is not closed under inverse")
    return GeneratorSet(dim, tuple(gens), symmetric=True, labels=tuple(labels), denominator=s)


def load_genset(path: str | Path) -> GeneratorSet:
    path = resolve_gens_path(path)
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GensetError("malformed", f"{path}: {exc}") from None
    return parse_genset(obj)


def genset_to_json(gens: GeneratorSet) -> dict:
    """Serialize with the declared denominator; powers chosen so numerators are integral."""
    s = gens.denominator
    out = []
    labels = gens.labels or tuple(f"g{i}" for i in range(len(gens.gens)))
    for label, g in zip(labels, gens.gens):
        power, scale = 0, 1
        while scale % g.den:
            power += 1
            scale *= s
            if power > 64:
                raise ValueError("generator denominator is not a power of the declared denominator")
        num = [x * (scale // g.den) for x in g.num]
        d = gens.dim
        out.append({"name": label, "num": [num[i * d:(i + 1) * d] for i in range(d)], "power": power})
    return {"schema": 1, "dim": gens.dim, "denominator": s, "generators": out,
            "symmetrize": False}


def dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def census_csv(census) -> str:
    lines = ["value,count"]
    lines += [f"{v},{c}" for v, c in census.rows()]
    return "\n".join(lines) + "\n"
