"""Mamdani fuzzy inference with piecewise-linear membership functions.

Inference uses singleton fuzzification, min for rule conjunction, clipping
for implication, max for aggregation and an exact (closed-form) centroid
for defuzzification.  Rulebases and membership geometry load from a small
line-oriented text format so the shipped defaults can be overridden.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import MissingInputError, NoRuleFiredError, ParseError

FORMAT_VERSION = 1
_MASS_FLOOR = 1e-12


@dataclass(frozen=True)
class MembershipFunction:
    """Piecewise-linear membership curve given as (x, degree) breakpoints.

    Outside the breakpoint range the end degrees extend flat, which is how
    shouldered terms are expressed.
    """

    label: str
    xs: tuple[float, ...]
    degrees: tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.degrees) or len(self.xs) < 2:
            raise ValueError(f"term {self.label}: need >= 2 aligned breakpoints")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError(f"term {self.label}: breakpoint x values must increase")
        if any(not 0.0 <= d <= 1.0 for d in self.degrees):
            raise ValueError(f"term {self.label}: degrees must lie in [0, 1]")

    def __call__(self, x):
        return np.interp(x, self.xs, self.degrees)

    @property
    def peak(self) -> float:
        return self.xs[int(np.argmax(self.degrees))]


@dataclass(frozen=True)
class FuzzyVariable:
    name: str
    universe: tuple[float, float]
    terms: tuple[MembershipFunction, ...]

    def __post_init__(self):
        lo, hi = self.universe
        if hi <= lo:
            raise ValueError(f"variable {self.name}: empty universe")
        labels = [t.label for t in self.terms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"variable {self.name}: duplicate term labels")
        grid = np.linspace(lo, hi, 257)
        cover = np.zeros_like(grid)
        for t in self.terms:
            cover = np.maximum(cover, t(grid))
        if np.any(cover <= 0):
            raise ValueError(f"variable {self.name}: terms do not cover the universe")

    def term(self, label: str) -> MembershipFunction:
        for t in self.terms:
            if t.label == label:
                return t
        raise KeyError(f"variable {self.name} has no term {label!r}")

    def clamp(self, x: float) -> float:
        lo, hi = self.universe
        return min(max(x, lo), hi)


@dataclass(frozen=True)
class Rule:
    antecedent: tuple[tuple[str, str], ...]  # (variable, term) conjunction
    consequent: tuple[str, str]

    def __post_init__(self):
        if not self.antecedent:
            raise ValueError("rule with empty antecedent")


@dataclass(frozen=True)
class RuleBase:
    name: str
    inputs: tuple[FuzzyVariable, ...]
    output: FuzzyVariable
    rules: tuple[Rule, ...]

    def __post_init__(self):
        by_name = {v.name: v for v in self.inputs}
        for rule in self.rules:
            for var, term in rule.antecedent:
                if var not in by_name:
                    raise ValueError(f"rule references unknown input {var!r}")
                by_name[var].term(term)
            cvar, cterm = rule.consequent
            if cvar != self.output.name:
                raise ValueError(f"rule concludes on {cvar!r}, output is {self.output.name!r}")
            self.output.term(cterm)

    def input(self, name: str) -> FuzzyVariable:
        for v in self.inputs:
            if v.name == name:
                return v
        raise KeyError(f"no input variable {name!r}")

    def check_completeness(self):
        """Every combination of input term peaks must fire some rule."""
        for combo in product(*(v.terms for v in self.inputs)):
            inputs = {v.name: t.peak for v, t in zip(self.inputs, combo)}
            agg = infer(self, inputs)
            if not agg.fired:
                names = {v.name: t.label for v, t in zip(self.inputs, combo)}
                raise ValueError(f"{self.name}: no rule fires for {names}")


@dataclass
class AggregatedMembership:
    """Pointwise max of strength-clipped consequent terms."""

    output: FuzzyVariable
    fired: list[tuple[float, MembershipFunction]] = field(default_factory=list)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        result = np.zeros_like(x)
        for strength, term in self.fired:
            result = np.maximum(result, np.minimum(strength, term(x)))
        return result


def fuzzify(variable: FuzzyVariable, crisp: float):
    """Degrees of every term at the (clamped) singleton input."""
    x = variable.clamp(float(crisp))
    return [(t.label, float(t(x))) for t in variable.terms]


def infer(rulebase: RuleBase, inputs: dict) -> AggregatedMembership:
    """Fire all rules at the crisp inputs and aggregate their consequents."""
    degrees = {}
    for var in rulebase.inputs:
        if var.name not in inputs:
            raise MissingInputError(f"missing input variable {var.name!r}")
        degrees[var.name] = dict(fuzzify(var, inputs[var.name]))
    agg = AggregatedMembership(output=rulebase.output)
    for rule in rulebase.rules:
        strength = min(degrees[var][term] for var, term in rule.antecedent)
        if strength > 0.0:
            agg.fired.append((strength, rulebase.output.term(rule.consequent[1])))
    return agg


def defuzzify_centroid(aggregate: AggregatedMembership) -> float:
    """Exact centroid of the aggregated membership over the output universe.

    The aggregate is piecewise linear, so the universe is cut at every term
    breakpoint, clip crossing and pairwise crossing; on each piece the max
    is a single linear segment which integrates in closed form.
    """
    lo, hi = aggregate.output.universe
    if not aggregate.fired:
        raise NoRuleFiredError("aggregate membership is identically zero")

    cuts = {lo, hi}
    for strength, term in aggregate.fired:
        for x in term.xs:
            if lo < x < hi:
                cuts.add(float(x))
        cuts.update(_clip_crossings(term, strength, lo, hi))
    base = np.array(sorted(cuts))

    refined = [base[0]]
    clipped = [(s, t) for s, t in aggregate.fired]
    for a, b in zip(base[:-1], base[1:]):
        xs = _pairwise_crossings(clipped, a, b)
        refined.extend(xs)
        refined.append(b)
    grid = np.array(sorted(set(refined)))

    num = 0.0
    den = 0.0
    for a, b in zip(grid[:-1], grid[1:]):
        if b - a <= 0:
            continue
        mid = 0.5 * (a + b)
        vals = [(min(s, float(t(mid))), s, t) for s, t in clipped]
        _, s, t = max(vals, key=lambda v: v[0])
        ga = min(s, float(t(a)))
        gb = min(s, float(t(b)))
        den += 0.5 * (ga + gb) * (b - a)
        num += (b - a) * (ga * (2 * a + b) + gb * (a + 2 * b)) / 6.0
    if den <= _MASS_FLOOR:
        raise NoRuleFiredError("aggregate membership has zero mass")
    return num / den


def _clip_crossings(term, strength, lo, hi):
    """x positions where the term's curve crosses the clip level."""
    out = []
    xs, ds = term.xs, term.degrees
    for (x0, d0), (x1, d1) in zip(zip(xs, ds), zip(xs[1:], ds[1:])):
        if (d0 - strength) * (d1 - strength) < 0:
            x = x0 + (strength - d0) * (x1 - x0) / (d1 - d0)
            if lo < x < hi:
                out.append(float(x))
    return out


def _pairwise_crossings(clipped, a, b):
    """Interior crossings of the clipped linear pieces on (a, b)."""
    pieces = []
    for s, t in clipped:
        ga = min(s, float(t(a)))
        gb = min(s, float(t(b)))
        pieces.append((ga, (gb - ga) / (b - a)))
    out = []
    for i in range(len(pieces)):
        gi, mi = pieces[i]
        for j in range(i + 1, len(pieces)):
            gj, mj = pieces[j]
            if mi != mj:
                x = a + (gj - gi) / (mi - mj)
                if a < x < b:
                    out.append(float(x))
    return out


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def parse_rulebase(text: str, source: str = "<string>") -> RuleBase:
    """Parse the line-oriented rulebase format.

    Layout::

        rulebase <name> v1
        var <name> <lo> <hi>
        term <var> <LABEL> <x>:<degree> <x>:<degree> ...
        output <name> <lo> <hi>
        rule IF <var> is <LABEL> AND ... THEN <outvar> is <LABEL>

    Comments start with ``#``.  Errors carry the line number.
    """
    name = None
    vars_order: list[str] = []
    universes: dict[str, tuple[float, float]] = {}
    terms: dict[str, list[MembershipFunction]] = {}
    output_name = None
    rule_specs: list[tuple[int, tuple, tuple]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kind = fields[0]
        if kind == "rulebase":
            if len(fields) != 3 or fields[2] != f"v{FORMAT_VERSION}":
                raise ParseError(
                    f"expected 'rulebase <name> v{FORMAT_VERSION}', got {line!r}", lineno
                )
            name = fields[1]
        elif kind in ("var", "output"):
            if len(fields) != 4:
                raise ParseError(f"expected '{kind} <name> <lo> <hi>'", lineno)
            vname = fields[1]
            if vname in universes:
                raise ParseError(f"variable {vname!r} redefined", lineno)
            try:
                lo, hi = float(fields[2]), float(fields[3])
            except ValueError:
                raise ParseError(f"bad universe bounds for {vname!r}", lineno) from None
            universes[vname] = (lo, hi)
            terms[vname] = []
            if kind == "var":
                vars_order.append(vname)
            elif output_name is not None:
                raise ParseError("second 'output' declaration", lineno)
            else:
                output_name = vname
        elif kind == "term":
            if len(fields) < 5:
                raise ParseError("expected 'term <var> <LABEL> <x>:<deg> ...'", lineno)
            vname, label = fields[1], fields[2]
            if vname not in universes:
                raise ParseError(f"term for undeclared variable {vname!r}", lineno)
            xs, ds = [], []
            for pair in fields[3:]:
                try:
                    x_s, d_s = pair.split(":")
                    xs.append(float(x_s))
                    ds.append(float(d_s))
                except ValueError:
                    raise ParseError(f"bad breakpoint {pair!r}", lineno) from None
            try:
                terms[vname].append(
                    MembershipFunction(label=label, xs=tuple(xs), degrees=tuple(ds))
                )
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
        elif kind == "rule":
            tokens = fields[1:]
            try:
                antecedent, consequent = _parse_rule_tokens(tokens)
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            rule_specs.append((lineno, antecedent, consequent))
        else:
            raise ParseError(f"unknown directive {kind!r}", lineno)

    if name is None:
        raise ParseError(f"{source}: missing 'rulebase' header", 1)
    if output_name is None:
        raise ParseError(f"{source}: missing 'output' declaration", 1)

    def build_var(vname):
        try:
            return FuzzyVariable(
                name=vname, universe=universes[vname], terms=tuple(terms[vname])
            )
        except ValueError as exc:
            raise ParseError(f"{source}: {exc}", 1) from None

    inputs = tuple(build_var(v) for v in vars_order)
    output = build_var(output_name)
    rules = []
    for lineno, antecedent, consequent in rule_specs:
        try:
            rules.append(Rule(antecedent=antecedent, consequent=consequent))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    try:
        return RuleBase(name=name, inputs=inputs, output=output, rules=tuple(rules))
    except (ValueError, KeyError) as exc:
        raise ParseError(f"{source}: {exc}", 1) from None


def _parse_rule_tokens(tokens):
    if not tokens or tokens[0] != "IF":
        raise ValueError("rule must start with IF")
    try:
        then_at = tokens.index("THEN")
    except ValueError:
        raise ValueError("rule missing THEN") from None
    clauses = tokens[1:then_at]
    tail = tokens[then_at + 1 :]
    antecedent = []
    i = 0
    while i < len(clauses):
        if i + 3 > len(clauses) or clauses[i + 1] != "is":
            raise ValueError("expected '<var> is <LABEL>'")
        antecedent.append((clauses[i], clauses[i + 2]))
        i += 3
        if i < len(clauses):
            if clauses[i] != "AND":
                raise ValueError("clauses must be joined with AND")
            i += 1
    if len(tail) != 3 or tail[1] != "is":
        raise ValueError("expected 'THEN <var> is <LABEL>'")
    return tuple(antecedent), (tail[0], tail[2])


def load_rulebase(path) -> RuleBase:
    with open(path, encoding="utf-8") as fh:
        return parse_rulebase(fh.read(), source=str(path))


def format_rulebase(rb: RuleBase) -> str:
    """Serialize back to the text format (round-trips through the parser)."""
    lines = [f"rulebase {rb.name} v{FORMAT_VERSION}"]
    for var in rb.inputs:
        lines.append(f"var {var.name} {var.universe[0]:g} {var.universe[1]:g}")
        for t in var.terms:
            pts = " ".join(f"{x:g}:{d:g}" for x, d in zip(t.xs, t.degrees))
            lines.append(f"term {var.name} {t.label} {pts}")
    lines.append(f"output {rb.output.name} {rb.output.universe[0]:g} {rb.output.universe[1]:g}")
    for t in rb.output.terms:
        pts = " ".join(f"{x:g}:{d:g}" for x, d in zip(t.xs, t.degrees))
        lines.append(f"term {rb.output.name} {t.label} {pts}")
    for rule in rb.rules:
        cond = " AND ".join(f"{v} is {t}" for v, t in rule.antecedent)
        lines.append(f"rule IF {cond} THEN {rule.consequent[0]} is {rule.consequent[1]}")
    return "\n".join(lines) + "\n"
