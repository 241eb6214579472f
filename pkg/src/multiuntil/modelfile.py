"""Line-oriented CTMC model files.

::

    # comment
    ctmc
    state 0 a
    state 1 b
    trans 0 1 2.0
    init 0 1

The ``ctmc`` header comes first.  State ids are contiguous from 0, labels are
identifiers.  Without ``init`` lines all initial mass sits on state 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ctmc import Ctmc
from .errors import ValidationError
from .formula import IDENT_RE, KEYWORDS, format_number


class ModelError(ValidationError):
    def __init__(self, message, line=None, path=None):
        where = f"{path or '<model>'}:{line}: " if line is not None else f"{path or '<model>'}: "
        super().__init__(where + message)
        self.line = line
        self.path = path


@dataclass(frozen=True)
class ModelFile:
    ctmc: Ctmc
    path: str = None
    state_lines: dict = None   # state id -> line number


def _int(tok, what, line, path):
    if not tok.isdigit():
        raise ModelError(f"{what} must be a nonnegative integer, got {tok!r}", line, path)
    return int(tok)


def _float(tok, what, line, path):
    try:
        value = float(tok)
    except ValueError:
        raise ModelError(f"{what} must be a decimal number, got {tok!r}", line, path) from None
    if not math.isfinite(value):
        raise ModelError(f"{what} must be finite, got {tok!r}", line, path)
    return value


def parse_model(text, path=None):
    states = {}
    state_lines = {}
    rates = {}
    trans_lines = {}
    init = {}
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        kw = toks[0]
        if not seen_header:
            if toks != ["ctmc"]:
                raise ModelError("expected 'ctmc' header as the first line", lineno, path)
            seen_header = True
            continue
        if kw == "state":
            if len(toks) < 2:
                raise ModelError("usage: state ID LABEL*", lineno, path)
            sid = _int(toks[1], "state id", lineno, path)
            if sid in states:
                raise ModelError(f"duplicate state id {sid} (first declared on line "
                                 f"{state_lines[sid]})", lineno, path)
            for label in toks[2:]:
                if not IDENT_RE.match(label) or label in KEYWORDS:
                    raise ModelError(f"invalid label {label!r}", lineno, path)
            states[sid] = frozenset(toks[2:])
            state_lines[sid] = lineno
        elif kw == "trans":
            if len(toks) != 4:
                raise ModelError("usage: trans SRC DST RATE", lineno, path)
            src = _int(toks[1], "source id", lineno, path)
            dst = _int(toks[2], "target id", lineno, path)
            rate = _float(toks[3], "rate", lineno, path)
            if src == dst:
                raise ModelError(f"self-loop {src} -> {dst} is not allowed", lineno, path)
            if rate <= 0:
                raise ModelError(f"rate must be positive, got {toks[3]}", lineno, path)
            if (src, dst) in rates:
                raise ModelError(f"duplicate transition {src} -> {dst} (first on line "
                                 f"{trans_lines[(src, dst)]})", lineno, path)
            rates[(src, dst)] = rate
            trans_lines[(src, dst)] = lineno
        elif kw == "init":
            if len(toks) != 3:
                raise ModelError("usage: init ID PROB", lineno, path)
            sid = _int(toks[1], "state id", lineno, path)
            prob = _float(toks[2], "probability", lineno, path)
            if not 0 <= prob <= 1:
                raise ModelError(f"initial probability must lie in [0, 1], got {toks[2]}",
                                 lineno, path)
            if sid in init:
                raise ModelError(f"duplicate init for state {sid}", lineno, path)
            init[sid] = (prob, lineno)
        elif kw == "ctmc":
            raise ModelError("repeated 'ctmc' header", lineno, path)
        else:
            raise ModelError(f"unknown directive {kw!r}", lineno, path)

    if not seen_header:
        raise ModelError("missing 'ctmc' header", None, path)
    if not states:
        raise ModelError("no states declared", None, path)
    n = len(states)
    for sid in sorted(states):
        if sid >= n:
            raise ModelError(f"state ids must be contiguous from 0; id {sid} leaves a gap",
                             state_lines[sid], path)
    for (src, dst), line in trans_lines.items():
        for sid in (src, dst):
            if sid not in states:
                raise ModelError(f"unknown state id {sid}", line, path)
    for sid, (_, line) in init.items():
        if sid not in states:
            raise ModelError(f"unknown state id {sid}", line, path)

    if init:
        initial = [0.0] * n
        for sid, (prob, _) in init.items():
            initial[sid] = prob
        if abs(math.fsum(initial) - 1.0) > 1e-9:
            raise ModelError(f"initial probabilities sum to {math.fsum(initial)!r}, not 1",
                             None, path)
    else:
        initial = None
    ctmc = Ctmc(n, rates, [states[i] for i in range(n)], initial)
    return ModelFile(ctmc, path, state_lines)


def read_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelError(f"cannot read model file: {exc.strerror}", None, path) from None
    return parse_model(text, str(path))


def serialize_model(ctmc):
    """Canonical text: states, then transitions sorted by (src, dst), then init."""
    lines = ["ctmc"]
    for s, labels in enumerate(ctmc.labels):
        lines.append(" ".join(["state", str(s), *sorted(labels)]))
    for (s, t), r in sorted(ctmc.rates.items()):
        lines.append(f"trans {s} {t} {format_number(r)}")
    for s, p in enumerate(ctmc.initial):
        if p > 0:
            lines.append(f"init {s} {format_number(p)}")
    return "\n".join(lines) + "\n"
