"""Expression DAG over the frequency variable and named circuit parameters.

Nodes are immutable and build a directed acyclic graph; shared sub-expressions
are stored once.  The module-level constructors perform the only
simplifications this engine needs: constant folding, flattening of nested
sums/products, and elimination of literal zeros and ones.  A fully numeric
circuit therefore collapses to plain ``complex`` arithmetic during
construction, while symbolic parameters survive as ``Sym`` leaves that are
bound at evaluation time.

All graph walks are iterative; star-mesh reductions produce DAGs deeper than
the default recursion limit.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator, Mapping, Union

import numpy as np

#: Name of the angular-frequency variable.  Reserved: circuit parameters may
#: not use it.
OMEGA_NAME = "w"

_NUMBER_TYPES = (int, float, complex, np.integer, np.floating, np.complexfloating)

NumberLike = Union[int, float, complex]
ExprLike = Union["Expr", NumberLike]


class Expr:
    """Base class for expression nodes."""

    __slots__ = ("__weakref__",)

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return intpow(self, exponent)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: complex):
        self.value = complex(value)

    def __repr__(self):
        return f"Const({self.value!r})"


class Sym(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return f"Sym({self.name!r})"


class Add(Expr):
    __slots__ = ("args",)

    def __init__(self, args: tuple):
        self.args = args

    def __repr__(self):
        return f"Add({self.args!r})"


class Mul(Expr):
    __slots__ = ("args",)

    def __init__(self, args: tuple):
        self.args = args

    def __repr__(self):
        return f"Mul({self.args!r})"


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        if isinstance(den, Const) and den.value == 0:
            raise ZeroDivisionError("expression denominator is the literal zero")
        self.num = num
        self.den = den

    def __repr__(self):
        return f"Div({self.num!r}, {self.den!r})"


class Neg(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        self.arg = arg

    def __repr__(self):
        return f"Neg({self.arg!r})"


class IntPow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: int):
        self.base = base
        self.exp = int(exp)

    def __repr__(self):
        return f"IntPow({self.base!r}, {self.exp})"


_ZERO = Const(0.0)
_ONE = Const(1.0)


def as_expr(x: ExprLike) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, _NUMBER_TYPES):
        return Const(complex(x))
    raise TypeError(f"cannot interpret {x!r} as an expression")


def const(value: NumberLike) -> Const:
    return Const(complex(value))


def sym(name: str) -> Sym:
    return Sym(name)


def omega() -> Sym:
    return Sym(OMEGA_NAME)


def is_zero(e: Expr) -> bool:
    """True only for the literal zero constant (no symbolic analysis)."""
    return isinstance(e, Const) and e.value == 0


def add(*terms: ExprLike) -> Expr:
    flat: list[Expr] = []
    total = 0j
    stack = [as_expr(t) for t in reversed(terms)]
    while stack:
        t = stack.pop()
        if isinstance(t, Add):
            stack.extend(reversed(t.args))
        elif isinstance(t, Const):
            total += t.value
        else:
            flat.append(t)
    if not flat:
        return Const(total)
    if total != 0:
        flat.insert(0, Const(total))
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors: ExprLike) -> Expr:
    flat: list[Expr] = []
    coeff = 1 + 0j
    stack = [as_expr(f) for f in reversed(factors)]
    while stack:
        f = stack.pop()
        if isinstance(f, Mul):
            stack.extend(reversed(f.args))
        elif isinstance(f, Const):
            coeff *= f.value
        else:
            flat.append(f)
    if coeff == 0:
        return _ZERO
    if not flat:
        return Const(coeff)
    if coeff != 1:
        flat.insert(0, Const(coeff))
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def div(num: ExprLike, den: ExprLike) -> Expr:
    num = as_expr(num)
    den = as_expr(den)
    if isinstance(den, Const):
        if den.value == 0:
            raise ZeroDivisionError("expression denominator is the literal zero")
        if isinstance(num, Const):
            return Const(num.value / den.value)
        return mul(Const(1.0 / den.value), num)
    if is_zero(num):
        return _ZERO
    return Div(num, den)


def neg(x: ExprLike) -> Expr:
    x = as_expr(x)
    if isinstance(x, Const):
        return Const(-x.value)
    if isinstance(x, Neg):
        return x.arg
    return Neg(x)


def sub(a: ExprLike, b: ExprLike) -> Expr:
    return add(a, neg(b))


def intpow(base: ExprLike, exp: int) -> Expr:
    base = as_expr(base)
    exp = int(exp)
    if exp == 0:
        return _ONE
    if exp == 1:
        return base
    if exp < 0:
        return div(_ONE, intpow(base, -exp))
    if isinstance(base, Const):
        return Const(base.value**exp)
    return IntPow(base, exp)


def _children(e: Expr) -> tuple:
    if isinstance(e, (Add, Mul)):
        return e.args
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, IntPow):
        return (e.base,)
    return ()


def postorder(e: Expr) -> Iterator[Expr]:
    """Yield each DAG node once, children before parents."""
    seen: set[int] = set()
    stack: list[tuple[Expr, bool]] = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded:
            seen.add(id(node))
            yield node
        else:
            stack.append((node, True))
            for child in _children(node):
                if id(child) not in seen:
                    stack.append((child, False))


def free_symbols(e: Expr) -> frozenset[str]:
    names = set()
    for node in postorder(e):
        if isinstance(node, Sym):
            names.add(node.name)
    return frozenset(names)


def compile_expr(e: Expr) -> Callable[[Mapping[str, object]], complex]:
    """Compile an expression DAG to a Python function of a bindings mapping.

    The generated function evaluates every node exactly once; symbols are
    looked up in the mapping, so arrays broadcast through numpy semantics.
    """
    names: dict[int, str] = {}
    lines: list[str] = []

    def ref(node: Expr) -> str:
        return names[id(node)]

    for i, node in enumerate(postorder(e)):
        name = f"v{i}"
        if isinstance(node, Const):
            lines.append(f"{name} = {node.value!r}")
        elif isinstance(node, Sym):
            lines.append(f"{name} = _b[{node.name!r}]")
        elif isinstance(node, Add):
            lines.append(f"{name} = " + " + ".join(ref(a) for a in node.args))
        elif isinstance(node, Mul):
            lines.append(f"{name} = " + " * ".join(ref(a) for a in node.args))
        elif isinstance(node, Div):
            lines.append(f"{name} = {ref(node.num)} / {ref(node.den)}")
        elif isinstance(node, Neg):
            lines.append(f"{name} = -{ref(node.arg)}")
        elif isinstance(node, IntPow):
            lines.append(f"{name} = {ref(node.base)} ** {node.exp}")
        else:  # pragma: no cover - node kinds are closed
            raise TypeError(f"unknown node {node!r}")
        names[id(node)] = name

    body = "\n    ".join(lines) if lines else "v0 = 0j"
    src = f"def _compiled(_b):\n    {body}\n    return {ref(e)}\n"
    namespace: dict[str, object] = {}
    exec(src, namespace)  # noqa: S102 - generated from a closed node set
    return namespace["_compiled"]


def evaluate(e: Expr, bindings: Mapping[str, object] | None = None):
    """One-shot evaluation.  Hot paths should cache ``compile_expr``."""
    return compile_expr(e)(bindings or {})


def evaluate_raw(e: Expr, bindings: Mapping[str, object] | None = None):
    """Evaluate without relying on constructor folding.

    Used by tests to confirm that folding performed by the smart
    constructors never changes values.
    """
    b = bindings or {}
    out: dict[int, complex] = {}
    for node in postorder(e):
        if isinstance(node, Const):
            v = node.value
        elif isinstance(node, Sym):
            v = b[node.name]
        elif isinstance(node, Add):
            v = out[id(node.args[0])]
            for a in node.args[1:]:
                v = v + out[id(a)]
        elif isinstance(node, Mul):
            v = out[id(node.args[0])]
            for a in node.args[1:]:
                v = v * out[id(a)]
        elif isinstance(node, Div):
            v = out[id(node.num)] / out[id(node.den)]
        elif isinstance(node, Neg):
            v = -out[id(node.arg)]
        else:
            v = out[id(node.base)] ** node.exp
        out[id(node)] = v
    return out[id(e)]
