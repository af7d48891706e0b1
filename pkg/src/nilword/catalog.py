"""Named families of class-2 groups and the line-oriented presentation format."""

from __future__ import annotations

import re
from pathlib import Path

from .groups import Group, GroupConsistencyError, GroupSpec, build_group, prime_factors

__all__ = [
    "CatalogError",
    "catalog_group",
    "catalog_spec",
    "heisenberg",
    "extraspecial",
    "special9",
    "cyclic",
    "direct_product",
    "parse_group_file",
    "format_group_file",
    "CATALOG_FAMILIES",
]

CATALOG_FAMILIES = (
    "heisenberg:p:e",
    "extraspecial:p:n:+|-",
    "special9:p",
    "cyclic:n",
    "product:A,B",
    "file:PATH",
)


class CatalogError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    return n >= 2 and prime_factors(n) == [n]


def heisenberg(p: int, e: int = 1) -> GroupSpec:
    """Unitriangular 3x3 matrices over ``Z/p^e``: ``a = E12``, ``b = E23``, ``z = E13``."""
    q = p ** e
    return GroupSpec(
        name=f"heisenberg:{p}:{e}",
        noncentral=(("a", q), ("b", q)),
        central=(("z", q),),
        commutator_table={(2, 1): (q - 1,)},
    )


def extraspecial(p: int, n: int, sign: str) -> GroupSpec:
    """Extraspecial group of order ``p^(1+2n)``, odd ``p``.

    ``+`` has exponent ``p``; ``-`` makes ``a1^p = z`` so the exponent is ``p^2``.
    """
    if p == 2:
        raise CatalogError("extraspecial 2-groups are not supported")
    if not _is_prime(p):
        raise CatalogError(f"{p} is not prime")
    if n < 1:
        raise CatalogError("extraspecial needs n >= 1")
    if sign not in "+-" or len(sign) != 1:
        raise CatalogError(f"sign must be '+' or '-', got {sign!r}")
    gens = []
    table = {}
    for i in range(1, n + 1):
        gens += [(f"a{i}", p), (f"b{i}", p)]
        table[(2 * i, 2 * i - 1)] = (p - 1,)  # [b_i, a_i] = z^-1
    tails = {1: (1,)} if sign == "-" else {}
    return GroupSpec(f"extraspecial:{p}:{n}:{sign}", tuple(gens), (("z", p),), table, tails)


def special9(p: int) -> GroupSpec:
    """Special group of order ``p^9`` with ``|G/G'| = p^4 < p^5 = |G'|``."""
    if not _is_prime(p):
        raise CatalogError(f"{p} is not prime")
    gens = tuple((f"e{i}", p) for i in range(1, 5))
    central = tuple((f"f{j}", p) for j in range(1, 6))

    def f(j):
        v = [0] * 5
        v[j - 1] = p - 1  # [e_j', e_i'] = [e_i', e_j']^-1
        return tuple(v)

    table = {(2, 1): f(1), (3, 1): f(2), (4, 1): f(3), (3, 2): f(4), (4, 2): f(5)}
    return GroupSpec(f"special9:{p}", gens, central, table)


def cyclic(n: int) -> GroupSpec:
    if n < 2:
        raise CatalogError("cyclic group needs n >= 2")
    return GroupSpec(f"cyclic:{n}", (("c", n),))


def direct_product(A: GroupSpec, B: GroupSpec) -> GroupSpec:
    da, sa = len(A.noncentral), len(A.central)
    sb = len(B.central)
    gens = tuple((f"{l}.1", m) for l, m in A.noncentral) + tuple(
        (f"{l}.2", m) for l, m in B.noncentral
    )
    central = tuple((f"{l}.1", c) for l, c in A.central) + tuple(
        (f"{l}.2", c) for l, c in B.central
    )
    table = {}
    for key, v in A.commutator_table.items():
        table[key] = tuple(v) + (0,) * sb
    for (j, i), v in B.commutator_table.items():
        table[(j + da, i + da)] = (0,) * sa + tuple(v)
    tails = {i: tuple(v) + (0,) * sb for i, v in A.power_tails.items()}
    tails.update({i + da: (0,) * sa + tuple(v) for i, v in B.power_tails.items()})
    return GroupSpec(f"product:{A.name},{B.name}", gens, central, table, tails)


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise CatalogError(f"invalid {what} {text!r}") from None


def catalog_spec(spec: str) -> GroupSpec:
    """Resolve a catalog string such as ``heisenberg:3:1`` to a :class:`GroupSpec`."""
    family, _, rest = spec.strip().partition(":")
    args = rest.split(":") if rest else []
    if family == "heisenberg":
        if len(args) not in (1, 2):
            raise CatalogError("usage: heisenberg:p[:e]")
        p = _int(args[0], "prime")
        e = _int(args[1], "exponent") if len(args) == 2 else 1
        if not _is_prime(p) or e < 1:
            raise CatalogError(f"invalid heisenberg parameters {spec!r}")
        return heisenberg(p, e)
    if family == "extraspecial":
        if len(args) != 3:
            raise CatalogError("usage: extraspecial:p:n:+|-")
        return extraspecial(_int(args[0], "prime"), _int(args[1], "n"), args[2])
    if family == "special9":
        if len(args) != 1:
            raise CatalogError("usage: special9:p")
        return special9(_int(args[0], "prime"))
    if family == "cyclic":
        if len(args) != 1:
            raise CatalogError("usage: cyclic:n")
        return cyclic(_int(args[0], "order"))
    if family == "product":
        # split at the first comma where both halves resolve
        errors = []
        for pos in [m.start() for m in re.finditer(",", rest)]:
            try:
                A, B = catalog_spec(rest[:pos]), catalog_spec(rest[pos + 1:])
            except CatalogError as exc:
                errors.append(str(exc))
                continue
            return direct_product(A, B)
        raise CatalogError(f"cannot split product {rest!r}" + (f": {errors[-1]}" if errors else ""))
    if family == "file":
        return parse_group_file(Path(rest).read_text())
    raise CatalogError(f"unknown group family {family!r}")


def catalog_group(spec: str) -> Group:
    try:
        return build_group(catalog_spec(spec))
    except GroupConsistencyError as exc:
        raise CatalogError(f"{spec}: {exc}") from exc


# --- presentation files --------------------------------------------------------

_TERM = re.compile(r"^([A-Za-z_][\w.]*)(?:\^(-?\d+))?$")


def _central_word(text: str, labels: dict[str, int], orders: list[int], lineno: int):
    vec = [0] * len(orders)
    for tok in text.split():
        m = _TERM.match(tok)
        if not m or m.group(1) not in labels:
            raise CatalogError(f"line {lineno}: unknown central factor {tok!r}")
        t = labels[m.group(1)]
        vec[t] = (vec[t] + int(m.group(2) or 1)) % orders[t]
    return tuple(vec)


def parse_group_file(text: str) -> GroupSpec:
    name = None
    gens: list[tuple[str, int]] = []
    cgens: list[tuple[str, int]] = []
    table: dict[tuple[int, int], tuple[int, ...]] = {}
    tails: dict[int, tuple[int, ...]] = {}
    pending: list[tuple[int, str, list[str]]] = []
    ended = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise CatalogError(f"line {lineno}: content after 'end'")
        toks = line.split()
        head = toks[0]
        if head == "group" and len(toks) == 2:
            name = toks[1]
        elif head in ("gen", "cgen") and len(toks) == 4 and toks[2] == "order":
            (gens if head == "gen" else cgens).append((toks[1], _int(toks[3], "order")))
        elif head in ("pow", "comm"):
            pending.append((lineno, line, toks))
        elif head == "end" and len(toks) == 1:
            ended = True
        else:
            raise CatalogError(f"line {lineno}: cannot parse {line!r}")
    if name is None:
        raise CatalogError("missing 'group <name>' line")
    if not ended:
        raise CatalogError("missing 'end' line")
    gidx = {l: i + 1 for i, (l, _) in enumerate(gens)}
    cidx = {l: i for i, (l, _) in enumerate(cgens)}
    corders = [c for _, c in cgens]
    for lineno, line, toks in pending:
        lhs, eq, rhs = line.partition("=")
        lt = lhs.split()
        if not eq:
            raise CatalogError(f"line {lineno}: missing '='")
        vec = _central_word(rhs, cidx, corders, lineno)
        if lt[0] == "pow" and len(lt) == 2 and lt[1] in gidx:
            tails[gidx[lt[1]]] = vec
        elif lt[0] == "comm" and len(lt) == 3 and lt[1] in gidx and lt[2] in gidx:
            j, i = gidx[lt[1]], gidx[lt[2]]
            if j <= i:
                raise CatalogError(f"line {lineno}: {lt[1]} must be declared after {lt[2]}")
            table[(j, i)] = vec
        else:
            raise CatalogError(f"line {lineno}: cannot parse {line!r}")
    return GroupSpec(name, tuple(gens), tuple(cgens), table, tails)


def _fmt_central(vec, cgens) -> str:
    parts = []
    for v, (label, _) in zip(vec, cgens):
        if v:
            parts.append(label if v == 1 else f"{label}^{v}")
    return " ".join(parts) if parts else ""


def format_group_file(spec: GroupSpec) -> str:
    lines = [f"group {spec.name.replace(' ', '_')}"]
    lines += [f"gen {l} order {m}" for l, m in spec.noncentral]
    lines += [f"cgen {l} order {c}" for l, c in spec.central]
    for i, vec in sorted(spec.power_tails.items()):
        if any(vec):
            lines.append(f"pow {spec.noncentral[i - 1][0]} = {_fmt_central(vec, spec.central)}")
    for (j, i), vec in sorted(spec.commutator_table.items()):
        if any(vec):
            lines.append(
                f"comm {spec.noncentral[j - 1][0]} {spec.noncentral[i - 1][0]} = "
                f"{_fmt_central(vec, spec.central)}"
            )
    lines.append("end")
    return "\n".join(lines) + "\n"
