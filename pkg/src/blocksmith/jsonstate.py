"""JSON encoding of machine states for the CLI and reports.

A state file is an object with optional "regs" and "mem" members:

    {"regs": {"r5": "0x100", "r6": {"region": "DispMem", "offset": 0}},
     "mem":  {"DispMem": {"88": "0x200"}}}

Register and cell values are integers or strings int() accepts with
base 0; pointers are {"region", "offset"} objects. Locations the file
does not mention are zero. Widths come from the machine description.
"""

from __future__ import annotations

from typing import Any

from .interp import Env
from .lang.state import MachineState
from .lang.values import Bitvec, Pointer, Value


class StateFormatError(Exception):
    pass


def _parse_value(env: Env, where: str, width: int, raw: Any) -> Value:
    if isinstance(raw, dict):
        region = raw.get("region")
        offset = raw.get("offset")
        if set(raw) != {"region", "offset"} \
                or region not in env.machine.regions \
                or not isinstance(offset, int) or offset < 0:
            raise StateFormatError(f"{where}: bad pointer {raw!r}")
        _, _, ref = env.machine.cell_geometry(region)
        if ref != width:
            raise StateFormatError(
                f"{where}: pointer into {region} has width {ref}, "
                f"location holds {width} bits")
        return Pointer(region, offset)
    if isinstance(raw, str):
        try:
            raw = int(raw, 0)
        except ValueError:
            raise StateFormatError(f"{where}: cannot parse {raw!r}") \
                from None
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise StateFormatError(f"{where}: expected an integer, "
                               f"got {raw!r}")
    if not 0 <= raw < (1 << width):
        raise StateFormatError(f"{where}: {raw:#x} does not fit in "
                               f"{width} bits")
    return Bitvec(width, raw)


def state_from_json(env: Env, data: Any) -> MachineState:
    if not isinstance(data, dict):
        raise StateFormatError("state file must be a JSON object")
    unknown = set(data) - {"regs", "mem"}
    if unknown:
        raise StateFormatError(f"unknown state members {sorted(unknown)}")
    st = MachineState()
    regs = data.get("regs", {})
    for r in env.machine.registers:
        w = env.machine.reg_width(r)
        st.regs[r] = _parse_value(env, r, w, regs[r]) if r in regs \
            else Bitvec(w, 0)
    extra = set(regs) - set(env.machine.registers)
    if extra:
        raise StateFormatError(f"unknown registers {sorted(extra)}")
    mem = data.get("mem", {})
    extra = set(mem) - set(env.machine.regions)
    if extra:
        raise StateFormatError(f"unknown regions {sorted(extra)}")
    for region in env.machine.regions:
        cw, _, _ = env.machine.cell_geometry(region)
        given = mem.get(region, {})
        cells: dict[int, Value] = {}
        seen = set()
        for key, raw in given.items():
            try:
                off = int(key, 0)
            except (TypeError, ValueError):
                raise StateFormatError(
                    f"{region}: bad offset {key!r}") from None
            seen.add(off)
            cells[off] = _parse_value(env, f"{region}[{off}]", cw, raw)
        valid = set(env.machine.cell_offsets(region))
        if not seen <= valid:
            raise StateFormatError(
                f"{region}: offsets {sorted(seen - valid)} are not cells")
        for off in valid - seen:
            cells[off] = Bitvec(cw, 0)
        st.mem[region] = cells
    return st


def _unparse_value(v: Value) -> Any:
    if isinstance(v, Pointer):
        return {"region": v.region, "offset": v.offset}
    assert isinstance(v, Bitvec)
    if v.width % 4 == 0:
        return f"0x{v.bits:0{v.width // 4}x}"
    return f"0b{v.bits:0{v.width}b}"


def state_to_json(env: Env, st: MachineState) -> dict:
    return {
        "regs": {r: _unparse_value(v) for r, v in sorted(st.regs.items())},
        "mem": {region: {str(off): _unparse_value(v)
                         for off, v in sorted(cells.items())}
                for region, cells in sorted(st.mem.items())},
    }
