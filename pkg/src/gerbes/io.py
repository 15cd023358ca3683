"""JSON artifact formats and a workspace that resolves cross-references between files.

Every file is a JSON object.  An optional ``kind`` field names its type;
otherwise the type is inferred from the keys present.

group       {"name": str, "order": int, "table": [[int]]}  or  {"builtin": "Q8"}
cover       {"points": int, "sets": [[int]], "mode": "pointwise" | "nerve"}
nerve       {"simplices": [[int]]}   (maximal simplices; faces are added)
groupoid    {"objects": int, "arrows": [[src, tgt]], "comp": [[int]]}   (-1 = undefined)
cocycle     {"group": ref, "cover": ref, "mode": str, "form": "sorted" | "full",
             "lambda": {"i,j[,p]": aut index or permutation}, "g": {"i,j,k[,p]": int}}
refinement  {"coarse": ref, "fine": ref, "map": [int], "inclusions": {"a": [points]}}

A ``ref`` is a path relative to the referring file, a builtin group name,
or an inline object.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from . import groups as grp
from .errors import ParseError
from .extensions import NonAbelianCocycle, complete_cocycle
from .groupoids import NERVE, POINTWISE, CoverModel, FiniteGroupoid, Nerve, nerve_of_cover
from .morita import Refinement

KINDS = ("group", "cover", "nerve", "groupoid", "cocycle", "refinement")


def read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"{path}: cannot read ({e.strerror})") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}") from None
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: top level must be an object")
    return obj


def infer_kind(obj: dict) -> str:
    if "kind" in obj:
        if obj["kind"] not in KINDS:
            raise ParseError(f"unknown kind {obj['kind']!r}")
        return obj["kind"]
    for key, kind in (("lambda", "cocycle"), ("map", "refinement"), ("table", "group"), ("builtin", "group"), ("sets", "cover"), ("simplices", "nerve"), ("comp", "groupoid")):
        if key in obj:
            return kind
    raise ParseError("cannot tell what kind of artifact this is")


def _int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"{what} must be an integer, got {v!r}")
    return v


def _int_list(v, what: str) -> list[int]:
    if not isinstance(v, list):
        raise ParseError(f"{what} must be a list")
    return [_int(x, what) for x in v]


def _int_matrix(v, what: str) -> list[list[int]]:
    if not isinstance(v, list) or not v:
        raise ParseError(f"{what} must be a non-empty list of rows")
    rows = [_int_list(r, what) for r in v]
    if len({len(r) for r in rows}) != 1:
        raise ParseError(f"{what} rows have different lengths")
    return rows


def _key(s: str, length: tuple[int, ...], what: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(x) for x in s.split(","))
    except ValueError:
        raise ParseError(f"{what} key {s!r} is not a comma-separated list of integers") from None
    if len(parts) not in length:
        raise ParseError(f"{what} key {s!r} has {len(parts)} entries")
    return parts


# parsing


def parse_group(obj: Any, check: bool = True) -> grp.FiniteGroup:
    """A group from a builtin name or a table; ``check`` validates the axioms."""
    if isinstance(obj, str):
        obj = {"builtin": obj}
    if not isinstance(obj, dict):
        raise ParseError("group must be a name or an object")
    if "builtin" in obj:
        try:
            return grp.builtin_group(obj["builtin"])
        except KeyError as e:
            raise ParseError(str(e.args[0])) from None
    if "table" not in obj:
        raise ParseError("group needs a table or a builtin name")
    table = _int_matrix(obj["table"], "group table")
    if "order" in obj and _int(obj["order"], "order") != len(table):
        raise ParseError(f"order {obj['order']} does not match a table with {len(table)} rows")
    if len(table[0]) != len(table):
        raise ParseError("group table must be square")
    name = str(obj.get("name", ""))
    if check:
        return grp.validate_group(table, name=name)
    return grp.FiniteGroup(table, name=name)


def parse_cover(obj: dict, mode: str | None = None) -> CoverModel:
    if "points" not in obj or "sets" not in obj:
        raise ParseError("cover needs points and sets")
    m = mode or obj.get("mode", POINTWISE)
    if m not in (POINTWISE, NERVE):
        raise ParseError(f"mode must be {POINTWISE!r} or {NERVE!r}")
    sets = [_int_list(s, "cover set") for s in obj["sets"]] if isinstance(obj["sets"], list) else None
    if sets is None:
        raise ParseError("sets must be a list")
    return CoverModel(_int(obj["points"], "points"), tuple(tuple(s) for s in sets), m)


def parse_nerve(obj: dict) -> Nerve:
    if "simplices" not in obj or not isinstance(obj["simplices"], list):
        raise ParseError("nerve needs a list of simplices")
    simplices = [_int_list(s, "simplex") for s in obj["simplices"]]
    try:
        return Nerve.from_simplices(simplices)
    except ValueError as e:
        raise ParseError(str(e)) from None


def parse_groupoid(obj: dict) -> FiniteGroupoid:
    """Tables are taken as given; units and inverses are read off the composition."""
    n_obj = _int(obj.get("objects"), "objects")
    arrows = obj.get("arrows")
    if not isinstance(arrows, list):
        raise ParseError("groupoid needs a list of arrows")
    st = [_int_list(a, "arrow") for a in arrows]
    if any(len(a) != 2 for a in st):
        raise ParseError("each arrow is [source, target]")
    comp = np.array(_int_matrix(obj["comp"], "composition table"), dtype=np.int64)
    n = len(st)
    if comp.shape != (n, n):
        raise ParseError("composition table must be arrows x arrows")
    src = np.array([a[0] for a in st], dtype=np.int64)
    tgt = np.array([a[1] for a in st], dtype=np.int64)
    unit = np.full(n_obj, -1, dtype=np.int64)
    for o in range(n_obj):
        for u in np.nonzero((src == o) & (tgt == o))[0]:
            if all(comp[u, x] == x for x in np.nonzero(src == o)[0]):
                unit[o] = u
                break
    inv = np.full(n, -1, dtype=np.int64)
    for x in range(n):
        if 0 <= src[x] < n_obj and 0 <= tgt[x] < n_obj:
            for y in np.nonzero((src == tgt[x]) & (tgt == src[x]))[0]:
                if comp[x, y] == unit[src[x]] and unit[src[x]] >= 0:
                    inv[x] = y
                    break
    return FiniteGroupoid(list(range(n_obj)), [tuple(a) + (k,) for k, a in enumerate(st)], src, tgt, unit, comp, inv, name=str(obj.get("name", "")))


class Workspace:
    """Loads artifacts by path, caching by resolved path; names must be unique."""

    def __init__(self, mode: str | None = None, limit_order: int = grp.DEFAULT_ORDER_BOUND):
        self.mode = mode
        self.limit_order = limit_order
        self.cache: dict[tuple[str, str], Any] = {}
        self.names: dict[str, str] = {}
        self._auts: dict[grp.FiniteGroup, grp.AutStructure] = {}

    def _register(self, obj: dict, path: str):
        name = obj.get("name")
        if isinstance(name, str) and name:
            other = self.names.setdefault(name, path)
            if other != path:
                raise ParseError(f"name {name!r} is used by both {other} and {path}")

    def raw(self, path: str | Path) -> dict:
        key = ("raw", str(Path(path).resolve()))
        if key not in self.cache:
            obj = read_json(path)
            self._register(obj, key[1])
            self.cache[key] = obj
        return self.cache[key]

    def _resolve(self, ref: Any, base: Path, builtin_ok: bool = False) -> tuple[Any, Path]:
        if isinstance(ref, dict):
            return ref, base
        if isinstance(ref, str):
            if builtin_ok and ref in grp.BUILTIN:
                return ref, base
            p = (base / ref) if not Path(ref).is_absolute() else Path(ref)
            return self.raw(p), p.parent
        raise ParseError(f"cannot resolve reference {ref!r}")

    def auts(self, G: grp.FiniteGroup) -> grp.AutStructure:
        if G not in self._auts:
            self._auts[G] = grp.automorphism_structure(G, self.limit_order)
        return self._auts[G]

    def group(self, ref: Any, base: Path = Path("."), check: bool = True) -> grp.FiniteGroup:
        obj, _ = self._resolve(ref, base, builtin_ok=True)
        return parse_group(obj, check)

    def cover(self, ref: Any, base: Path = Path("."), mode: str | None = None) -> CoverModel:
        obj, _ = self._resolve(ref, base)
        return parse_cover(obj, mode or self.mode)

    def nerve(self, ref: Any, base: Path = Path(".")) -> Nerve:
        obj, _ = self._resolve(ref, base)
        if infer_kind(obj) == "cover":
            return nerve_of_cover(parse_cover(obj))
        return parse_nerve(obj)

    def cocycle(self, path: str | Path) -> NonAbelianCocycle:
        obj = self.raw(path)
        return self.cocycle_from(obj, Path(path).parent)

    def cocycle_from(self, obj: dict, base: Path) -> NonAbelianCocycle:
        for field in ("group", "cover", "lambda", "g"):
            if field not in obj:
                raise ParseError(f"cocycle is missing {field!r}")
        G = self.group(obj["group"], base)
        cover_mode = self.mode or obj.get("mode")
        cover = self.cover(obj["cover"], base, cover_mode)
        if "mode" in obj and self.mode is None:
            cobj, _ = self._resolve(obj["cover"], base)
            if cobj.get("mode", POINTWISE) != obj["mode"]:
                raise ParseError(f"cocycle mode {obj['mode']!r} does not match its cover")
        auts = self.auts(G)
        pointwise = cover.mode == POINTWISE
        lam_len = (3,) if pointwise else (2,)
        g_len = (4,) if pointwise else (3,)
        if not isinstance(obj["lambda"], dict) or not isinstance(obj["g"], dict):
            raise ParseError("lambda and g must be objects keyed by index strings")
        lam = {}
        for k, v in obj["lambda"].items():
            key = _key(k, lam_len, "lambda")
            key = key if pointwise else key + (None,)
            if isinstance(v, int) and not isinstance(v, bool):
                if not 0 <= v < len(auts.reps):
                    raise ParseError(f"lambda {k}: automorphism index {v} out of range")
                lam[key] = auts.reps[v]
            else:
                perm = tuple(_int_list(v, f"lambda {k}"))
                if len(perm) != G.order:
                    raise ParseError(f"lambda {k}: permutation has the wrong length")
                lam[key] = perm
        g = {}
        for k, v in obj["g"].items():
            key = _key(k, g_len, "g")
            key = key if pointwise else key + (None,)
            v = _int(v, f"g {k}")
            if not 0 <= v < G.order:
                raise ParseError(f"g {k}: element {v} out of range")
            g[key] = v
        form = obj.get("form", "sorted")
        if form == "sorted":
            for key in list(lam) + list(g):
                idx = key[:-1]
                if any(a >= b for a, b in zip(idx, idx[1:])):
                    raise ParseError(f"sorted-form cocycle has a non-increasing key {_keystr(key)}")
            return complete_cocycle(G, cover, lam, g, auts)
        if form != "full":
            raise ParseError(f"form must be 'sorted' or 'full', got {form!r}")
        want_l, want_g = set(cover.admissible(1)), set(cover.admissible(2))
        if set(lam) != want_l or set(g) != want_g:
            missing = sorted((want_l - set(lam)) | (want_g - set(g)), key=repr)
            extra = sorted((set(lam) - want_l) | (set(g) - want_g), key=repr)
            what = f"missing {missing[0]}" if missing else f"unexpected {extra[0]}"
            raise ParseError(f"full cocycle keys do not match the cover: {what}")
        return NonAbelianCocycle(G, cover, lam, g, auts)

    def refinement(self, path: str | Path) -> Refinement:
        obj = self.raw(path)
        base = Path(path).parent
        for field in ("coarse", "fine", "map"):
            if field not in obj:
                raise ParseError(f"refinement is missing {field!r}")
        coarse = self.cover(obj["coarse"], base)
        fine = self.cover(obj["fine"], base, coarse.mode)
        r = tuple(_int_list(obj["map"], "refinement map"))
        inc = obj.get("inclusions")
        if inc is not None:
            if not isinstance(inc, dict):
                raise ParseError("inclusions must be an object")
            for a, pts in inc.items():
                a = _key(a, (1,), "inclusions")[0]
                if not 0 <= a < fine.n_sets or tuple(sorted(_int_list(pts, "inclusions"))) != fine.sets[a]:
                    raise ParseError(f"inclusion data for fine set {a} does not match the fine cover")
        return Refinement(coarse, fine, r)


# writing


def _keystr(key: tuple) -> str:
    return ",".join(str(k) for k in key if k is not None)


def group_to_json(G: grp.FiniteGroup) -> dict:
    return {"kind": "group", "name": G.name, "order": G.order, "table": G.table.tolist()}


def cover_to_json(C: CoverModel) -> dict:
    return {"kind": "cover", "points": C.points, "sets": [list(s) for s in C.sets], "mode": C.mode}


def nerve_to_json(N: Nerve) -> dict:
    return {"kind": "nerve", "vertices": N.vertices, "simplices": [[list(s) for s in d] for d in N.simplices]}


def cocycle_to_json(data: NonAbelianCocycle, group_ref: Any = None, cover_ref: Any = None) -> dict:
    """Full-form cocycle; automorphisms as rep indices, keys in canonical order."""
    auts = data.auts
    lam = {_keystr(k): auts.aut_index(data.lam[k]) for k in sorted(data.lam, key=lambda k: (k[-1] or 0,) + k[:-1])}
    g = {_keystr(k): int(data.g[k]) for k in sorted(data.g, key=lambda k: (k[-1] or 0,) + k[:-1])}
    return {
        "kind": "cocycle",
        "group": group_ref if group_ref is not None else group_to_json(data.group),
        "cover": cover_ref if cover_ref is not None else cover_to_json(data.cover),
        "mode": data.mode,
        "form": "full",
        "lambda": lam,
        "g": g,
    }


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"
