"""JSON instance files and byte-stable report encoding."""

import json

from .errors import JsonError, ValidationError, WordSyntaxError
from .graph import CYCLIC, TRIVIAL, GraphOfGroups, validate
from .words import Alphabet

_VERTEX_KEYS = {"id", "generators"}
_EDGE_KEYS = {"id", "from", "to", "edge_group", "u", "v"}
SAFE_INT = 2 ** 53


def _expect(cond, message, path):
    if not cond:
        raise ValidationError(message, path)


def parse_instance(data: bytes | str) -> GraphOfGroups:
    """Parse and validate an instance document.

    Errors name the byte offset (malformed JSON) or the field path (schema and
    word problems).
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise JsonError(f"invalid UTF-8 at byte {exc.start}", exc.start) from None
    else:
        text = data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise JsonError(f"{exc.msg} at byte {offset}", offset) from None

    _expect(isinstance(doc, dict), "top level must be an object", "$")
    extra = set(doc) - {"vertices", "edges"}
    _expect(not extra, f"unexpected keys {sorted(extra)}", "$")
    _expect(isinstance(doc.get("vertices"), list), "vertices must be a list", "vertices")
    edges = doc.get("edges", [])
    _expect(isinstance(edges, list), "edges must be a list", "edges")

    vertices, alphabets = [], {}
    for i, v in enumerate(doc["vertices"]):
        path = f"vertices[{i}]"
        _expect(isinstance(v, dict), "vertex must be an object", path)
        _expect(not set(v) - _VERTEX_KEYS, f"unexpected keys {sorted(set(v) - _VERTEX_KEYS)}", path)
        _expect(isinstance(v.get("id"), str), f"{path}.id missing or not a string", f"{path}.id")
        gens = v.get("generators")
        _expect(isinstance(gens, list) and all(isinstance(x, str) for x in gens),
                f"{path}.generators must be a list of strings", f"{path}.generators")
        try:
            alphabet = Alphabet(tuple(gens))
        except ValidationError as exc:
            raise ValidationError(str(exc), f"{path}.generators") from None
        alphabets.setdefault(v["id"], alphabet)
        vertices.append((v["id"], alphabet))

    raw_edges = []
    for i, e in enumerate(edges):
        path = f"edges[{i}]"
        _expect(isinstance(e, dict), "edge must be an object", path)
        _expect(not set(e) - _EDGE_KEYS, f"unexpected keys {sorted(set(e) - _EDGE_KEYS)}", path)
        for key in ("id", "from", "to"):
            _expect(isinstance(e.get(key), str), f"{path}.{key} missing or not a string",
                    f"{path}.{key}")
        kind = e.get("edge_group")
        _expect(kind in (TRIVIAL, CYCLIC), f"{path}.edge_group must be \"trivial\" or \"Z\"",
                f"{path}.edge_group")
        words = [None, None]
        for j, (key, end) in enumerate((("u", "from"), ("v", "to"))):
            if kind == TRIVIAL:
                _expect(key not in e, f"{path}.{key} not allowed on a trivial edge", f"{path}.{key}")
                continue
            _expect(key in e, f"{path}.{key} missing", f"{path}.{key}")
            _expect(isinstance(e[key], str), f"{path}.{key} must be a string", f"{path}.{key}")
            alphabet = alphabets.get(e[end])
            if alphabet is None:
                continue  # reported as UnknownVertexRef by validate
            try:
                words[j] = alphabet.parse(e[key])
            except WordSyntaxError as exc:
                err = WordSyntaxError(f"{path}.{key}: {exc}", exc.position)
                err.path = f"{path}.{key}"
                raise err from None
        raw_edges.append((e["id"], e["from"], e["to"], kind, *words))
    return validate(vertices, raw_edges)


def instance_to_json(g: GraphOfGroups) -> dict:
    edges = []
    for e in g.edges:
        d = {"id": e.id, "from": e.source, "to": e.target, "edge_group": e.kind}
        if e.cyclic:
            d["u"] = g.vertex(e.source).alphabet.format(e.u)
            d["v"] = g.vertex(e.target).alphabet.format(e.v)
        edges.append(d)
    return {"vertices": [{"id": v.id, "generators": list(v.alphabet.names)} for v in g.vertices],
            "edges": edges}


def _safe(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, float)):
        return obj
    if isinstance(obj, int):
        return str(obj) if abs(obj) >= SAFE_INT else obj
    if isinstance(obj, dict):
        return {str(k): _safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_safe(x) for x in obj]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    """Canonical encoding: sorted keys, two-space indent, big ints as strings."""
    return json.dumps(_safe(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
