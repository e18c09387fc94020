"""Model file serialization.

Models are JSON documents whose numeric entries stay exact: integers and
decimal literals are parsed straight to rationals (0.4 becomes 2/5), and
"p/q" strings are accepted everywhere.  Rationals are emitted back as
strings, so load(emit(model)) round-trips to an exactly equal model.
"""

from __future__ import annotations

import json
from typing import Optional, Tuple

from .errors import ModelFormatError
from .model import Dims, NdsModel, Scm, SubsystemLft
from .polymat import RatMatrix
from .ratpoly import Poly, Rat, RatFunc, as_rat

FORMAT_VERSION = 1

_NOMINAL_KEYS = {
    "A_xx": "a_xx0",
    "A_xv": "a_xv0",
    "B_x": "b_x0",
    "A_zx": "a_zx0",
    "A_zv": "a_zv0",
    "B_z": "b_z0",
    "C_x": "c_x0",
    "C_v": "c_v0",
    "D_u": "d_u0",
}
_MODULATION_KEYS = {
    "H_x": "h_x",
    "H_z": "h_z",
    "H_y": "h_y",
    "F_x": "f_x",
    "F_v": "f_v",
    "F_u": "f_u",
    "G": "g",
}


def _rat_entry(x) -> Rat:
    try:
        return as_rat(x)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ModelFormatError(f"bad rational entry {x!r}: {exc}") from exc


def _grid(obj, what: str):
    if not isinstance(obj, list) or any(not isinstance(r, list) for r in obj):
        raise ModelFormatError(f"{what} must be a list of rows")
    return [[_rat_entry(x) for x in row] for row in obj]


def _grid_str(grid):
    return [[str(x) for x in row] for row in grid]


def subsystem_to_dict(s: SubsystemLft) -> dict:
    d = s.dims
    out = {
        "dims": {
            "m_u": d.m_u,
            "m_v": d.m_v,
            "m_x": d.m_x,
            "m_y": d.m_y,
            "m_z": d.m_z,
            "m_g": d.m_g,
            "m_p": d.m_p,
        },
        "nominal": {k: _grid_str(getattr(s, attr)) for k, attr in _NOMINAL_KEYS.items()},
    }
    if d.m_g or d.m_p:
        out["modulation"] = {
            k: _grid_str(getattr(s, attr)) for k, attr in _MODULATION_KEYS.items()
        }
        out["P"] = _grid_str(s.p)
    return out


def subsystem_from_dict(obj: dict, index: int) -> SubsystemLft:
    try:
        dims_obj = obj["dims"]
        dims = Dims(
            m_u=int(dims_obj["m_u"]),
            m_v=int(dims_obj["m_v"]),
            m_x=int(dims_obj["m_x"]),
            m_y=int(dims_obj["m_y"]),
            m_z=int(dims_obj["m_z"]),
            m_g=int(dims_obj.get("m_g", 0)),
            m_p=int(dims_obj.get("m_p", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"subsystem {index}: bad dims ({exc})") from exc
    nominal = obj.get("nominal")
    if nominal is None:
        raise ModelFormatError(f"subsystem {index}: missing nominal matrices")
    kwargs = {}
    for k, attr in _NOMINAL_KEYS.items():
        if k not in nominal:
            raise ModelFormatError(f"subsystem {index}: missing nominal matrix {k}")
        kwargs[attr] = _grid(nominal[k], f"subsystem {index} {k}")
    modulation = obj.get("modulation")
    if dims.m_g or dims.m_p:
        if modulation is None or "P" not in obj:
            raise ModelFormatError(
                f"subsystem {index}: m_g/m_p nonzero but modulation blocks or P missing"
            )
        for k, attr in _MODULATION_KEYS.items():
            if k not in modulation:
                raise ModelFormatError(f"subsystem {index}: missing modulation block {k}")
            kwargs[attr] = _grid(modulation[k], f"subsystem {index} {k}")
        kwargs["p"] = _grid(obj["P"], f"subsystem {index} P")
    else:
        for k, attr in _MODULATION_KEYS.items():
            rows = {"H_x": dims.m_x, "H_z": dims.m_z, "H_y": dims.m_y}.get(k, dims.m_g)
            cols = {"H_x": dims.m_p, "H_z": dims.m_p, "H_y": dims.m_p}.get(k)
            if cols is None:
                cols = {
                    "F_x": dims.m_x,
                    "F_v": dims.m_v,
                    "F_u": dims.m_u,
                    "G": dims.m_p,
                }[k]
            kwargs[attr] = [[as_rat(0)] * cols for _ in range(rows)]
        kwargs["p"] = [[as_rat(0)] * dims.m_g for _ in range(dims.m_p)]
    from .errors import ShapeMismatch

    try:
        return SubsystemLft(dims=dims, **kwargs)
    except ShapeMismatch as exc:
        raise ModelFormatError(f"subsystem {index}: {exc}") from exc


def _poly_from_coeffs(obj, what):
    if not isinstance(obj, list):
        raise ModelFormatError(f"{what} must be a coefficient list")
    return Poly([_rat_entry(x) for x in obj])


def ratmatrix_from_dict(obj, what: str) -> RatMatrix:
    """Entries are either plain rationals or {"num": [...], "den": [...]}
    ascending coefficient lists."""
    if not isinstance(obj, list):
        raise ModelFormatError(f"{what} must be a list of rows")
    rows = []
    for row in obj:
        out_row = []
        for e in row:
            if isinstance(e, dict):
                num = _poly_from_coeffs(e.get("num", []), f"{what} num")
                den = _poly_from_coeffs(e.get("den", [1]), f"{what} den")
                if den.is_zero():
                    raise ModelFormatError(f"{what}: zero denominator")
                out_row.append(RatFunc(num, den))
            else:
                out_row.append(RatFunc.const(_rat_entry(e)))
        rows.append(out_row)
    return RatMatrix(rows)


def ratmatrix_to_dict(g: RatMatrix):
    out = []
    for i in range(g.rows):
        row = []
        for j in range(g.cols):
            e = g[i, j]
            if e.is_constant():
                row.append(str(e.as_constant()))
            else:
                row.append(
                    {
                        "num": [str(c) for c in e.num.coeffs],
                        "den": [str(c) for c in e.den.coeffs],
                    }
                )
        out.append(row)
    return out


def model_to_dict(m: NdsModel, metadata: Optional[dict] = None) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "subsystems": [subsystem_to_dict(s) for s in m.subsystems],
    }
    if m.phi.zero_pattern is not None:
        out["phi"] = {
            "values": _grid_str(m.phi.as_list()),
            "pattern": [[bool(x) for x in row] for row in m.phi.zero_pattern],
        }
    else:
        out["phi"] = _grid_str(m.phi.as_list())
    if metadata:
        out["metadata"] = metadata
    return out


def model_from_dict(obj: dict) -> Tuple[NdsModel, dict]:
    """Returns the model plus side-channel extras (factorization, metadata)."""
    if not isinstance(obj, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = obj.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {version}")
    subs_obj = obj.get("subsystems")
    if not subs_obj:
        raise ModelFormatError("model needs at least one subsystem")
    subs = [subsystem_from_dict(s, i) for i, s in enumerate(subs_obj)]
    phi_obj = obj.get("phi")
    if phi_obj is None:
        raise ModelFormatError("model is missing phi")
    if isinstance(phi_obj, dict):
        values = _grid(phi_obj.get("values"), "phi values")
        pattern = phi_obj.get("pattern")
        if pattern is not None:
            pattern = [[bool(x) for x in row] for row in pattern]
        phi = Scm(values, zero_pattern=pattern)
    else:
        phi = Scm(_grid(phi_obj, "phi"))
    from .errors import ShapeMismatch

    try:
        model = NdsModel(subs, phi)
    except ShapeMismatch as exc:
        raise ModelFormatError(str(exc)) from exc
    extras = {"metadata": obj.get("metadata", {})}
    fact = obj.get("factorization")
    if fact is not None:
        extras["gbar_yv"] = ratmatrix_from_dict(fact.get("gbar_yv"), "gbar_yv")
        extras["gbar_zu"] = ratmatrix_from_dict(fact.get("gbar_zu"), "gbar_zu")
    return model, extras


def load_model(path: str) -> Tuple[NdsModel, dict]:
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f, parse_float=_rat_entry, parse_int=_rat_entry)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    return model_from_dict(obj)


def save_model(m: NdsModel, path: str, metadata: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model_to_dict(m, metadata), f, indent=2)
        f.write("\n")
