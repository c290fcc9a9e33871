"""Trace scalar code into a straight-line Python function.

The closed-loop evaluation (plant jets, stabilizing functions, commanded input)
is written once against plain floats.  Running it with :class:`Sym` arguments
records every scalar operation; comparisons become branch points and all
branch outcomes are explored, so the emitted function reproduces the original
control flow exactly.  Jet bookkeeping, list allocation and constant entries
disappear, which makes the RK4 loop several times faster.

Paths that end in a package error are replaced by ``raise Fallback``.  The
caller is expected to catch it (together with ``ArithmeticError`` and
``ValueError``) and re-run the interpreted code to obtain the precise error.
"""

import math

from .errors import SatBackstepError


class Fallback(Exception):
    """Raised by compiled code where the interpreted path would raise."""


_ctx = None


def _fmt(v):
    if isinstance(v, Sym):
        return v.name
    v = float(v)
    if not math.isfinite(v):
        return f"float({str(v)!r})"
    r = repr(v)
    return f"({r})" if v < 0 or r.startswith("-") else r


def _deps(*vals):
    return frozenset(v.name for v in vals if isinstance(v, Sym))


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


class Sym:
    """A traced scalar; operations append lines to the active trace."""

    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return f"Sym({self.name})"

    def __bool__(self):
        raise TypeError("truth value of a traced scalar is undefined")

    def __float__(self):
        raise TypeError("traced scalar has no concrete value")

    def __add__(self, o):
        if _num(o) and o == 0:
            return self
        return _ctx.emit(f"{_fmt(self)} + {_fmt(o)}", self, o)

    def __radd__(self, o):
        if _num(o) and o == 0:
            return self
        return _ctx.emit(f"{_fmt(o)} + {_fmt(self)}", o, self)

    def __sub__(self, o):
        if _num(o) and o == 0:
            return self
        return _ctx.emit(f"{_fmt(self)} - {_fmt(o)}", self, o)

    def __rsub__(self, o):
        return _ctx.emit(f"{_fmt(o)} - {_fmt(self)}", o, self)

    def __mul__(self, o):
        if _num(o):
            if o == 1:
                return self
            if o == 0:
                return 0.0
        return _ctx.emit(f"{_fmt(self)} * {_fmt(o)}", self, o)

    def __rmul__(self, o):
        if _num(o):
            if o == 1:
                return self
            if o == 0:
                return 0.0
        return _ctx.emit(f"{_fmt(o)} * {_fmt(self)}", o, self)

    def __truediv__(self, o):
        if _num(o) and o == 1:
            return self
        return _ctx.emit(f"{_fmt(self)} / {_fmt(o)}", self, o)

    def __rtruediv__(self, o):
        if _num(o) and o == 0:
            return 0.0
        return _ctx.emit(f"{_fmt(o)} / {_fmt(self)}", o, self)

    def __pow__(self, m):
        return _ctx.emit(f"{_fmt(self)} ** {_fmt(m)}", self, m)

    def __neg__(self):
        return _ctx.emit(f"-{_fmt(self)}", self)

    def __pos__(self):
        return self

    def __abs__(self):
        return _ctx.emit(f"abs({_fmt(self)})", self)

    def _cmp(self, op, o):
        return _ctx.decide(f"{_fmt(self)} {op} {_fmt(o)}", _deps(self, o))

    def __lt__(self, o):
        return self._cmp("<", o)

    def __le__(self, o):
        return self._cmp("<=", o)

    def __gt__(self, o):
        return self._cmp(">", o)

    def __ge__(self, o):
        return self._cmp(">=", o)

    def sin(self):
        return _ctx.emit(f"_sin({self.name})", self)

    def cos(self):
        return _ctx.emit(f"_cos({self.name})", self)

    def sqrt(self):
        return _ctx.emit(f"_sqrt({self.name})", self)

    def log(self):
        return _ctx.emit(f"_log({self.name})", self)

    def log1p(self):
        return _ctx.emit(f"_log1p({self.name})", self)

    def exp(self):
        return _ctx.emit(f"_exp({self.name})", self)


class _Trace:
    def __init__(self, decisions):
        self.decisions = decisions
        self.taken = []
        self.events = []
        self.counter = 0

    def emit(self, expr, *operands):
        name = f"v{self.counter}"
        self.counter += 1
        self.events.append(("line", name, expr, _deps(*operands)))
        return Sym(name)

    def decide(self, cond, deps):
        idx = len(self.taken)
        outcome = self.decisions[idx] if idx < len(self.decisions) else True
        self.taken.append(outcome)
        self.events.append(("branch", cond, deps, outcome))
        return outcome


def _run(fn, n_inputs, decisions):
    global _ctx
    trace = _Trace(decisions)
    prev, _ctx = _ctx, trace
    try:
        args = [Sym(f"a{i}") for i in range(n_inputs)]
        try:
            result = fn(*args)
        except SatBackstepError:
            trace.events.append(("raise",))
        else:
            exprs = [_fmt(r) for r in result]
            deps = frozenset().union(*(_deps(r) for r in result)) if result else frozenset()
            trace.events.append(("return", exprs, deps))
    finally:
        _ctx = prev
    return trace


def _explore(fn, n_inputs, max_paths):
    paths = []
    stack = [[]]
    while stack:
        prefix = stack.pop()
        trace = _run(fn, n_inputs, prefix)
        paths.append(trace.events)
        if len(paths) > max_paths:
            raise RuntimeError(f"trace exceeded {max_paths} control-flow paths")
        for i in range(len(trace.taken) - 1, len(prefix) - 1, -1):
            stack.append(trace.taken[:i] + [not trace.taken[i]])
    return paths


def _liveness(paths):
    live = set()
    for events in paths:
        for ev in events:
            if ev[0] == "branch" or ev[0] == "return":
                live |= ev[2]
    changed = True
    while changed:
        changed = False
        for events in paths:
            for ev in reversed(events):
                if ev[0] == "line" and ev[1] in live and not ev[3] <= live:
                    live |= ev[3]
                    changed = True
    return live


def _emit_tree(paths, pos, indent, live, out):
    events = paths[0]
    pad = "    " * indent
    while True:
        ev = events[pos]
        kind = ev[0]
        if kind == "line":
            if ev[1] in live:
                out.append(f"{pad}{ev[1]} = {ev[2]}")
            pos += 1
        elif kind == "return":
            out.append(f"{pad}return ({', '.join(ev[1])}{',' if len(ev[1]) == 1 else ''})")
            return
        elif kind == "raise":
            out.append(f"{pad}raise Fallback")
            return
        else:
            cond = ev[1]
            yes = [p for p in paths if p[pos][3]]
            no = [p for p in paths if not p[pos][3]]
            if _is_raise(no, pos + 1):
                out.append(f"{pad}if not ({cond}):")
                out.append(f"{pad}    raise Fallback")
                paths, events, pos = yes, yes[0], pos + 1
            elif _is_raise(yes, pos + 1):
                out.append(f"{pad}if {cond}:")
                out.append(f"{pad}    raise Fallback")
                paths, events, pos = no, no[0], pos + 1
            else:
                out.append(f"{pad}if {cond}:")
                _emit_tree(yes, pos + 1, indent + 1, live, out)
                out.append(f"{pad}else:")
                _emit_tree(no, pos + 1, indent + 1, live, out)
                return


def _is_raise(group, pos):
    # a branch arm that only leads to errors, possibly after dead lines
    for events in group:
        for ev in events[pos:]:
            if ev[0] == "raise":
                break
            if ev[0] != "line":
                return False
        else:
            return False
    return True


def compile_trace(fn, n_inputs, name="traced", max_paths=4096):
    """Trace ``fn(*scalars) -> tuple`` and return ``(compiled_fn, source)``.

    Every input is treated as a symbolic scalar; closed-over constants are
    folded into the generated source.
    """
    paths = _explore(fn, n_inputs, max_paths)
    live = _liveness(paths)
    args = ", ".join(f"a{i}" for i in range(n_inputs))
    lines = [f"def {name}({args}):"]
    _emit_tree(paths, 0, 1, live, lines)
    source = "\n".join(lines) + "\n"
    namespace = {
        "Fallback": Fallback,
        "_sin": math.sin,
        "_cos": math.cos,
        "_sqrt": math.sqrt,
        "_log": math.log,
        "_log1p": math.log1p,
        "_exp": math.exp,
    }
    exec(compile(source, f"<{name}>", "exec"), namespace)
    return namespace[name], source
