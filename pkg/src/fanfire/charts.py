"""Tree-of-charts smoothness search as a Petri net with early termination.

Chart tokens wait on ``i``.  Depending on the oracle's ``codim_reached``
guard either ``desc`` (descend into child charts) or ``Jac`` (Jacobian
criterion on a leaf) fires; both put a tagged token on ``classified``.
From there ``sing`` moves a singularity certificate to the terminal place
``o`` (which cancels the run), ``sm`` deletes a finished chart, and
``respawn`` moves children back to ``i`` one per firing.  A run that ends
with nothing enabled and no certificate on ``o`` proves smoothness.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Protocol, Sequence

from . import _kernels
from .petri import Arc, BUILTINS, Marking, PetriNet, Place, Registry, TokenValue, Transition
from .poly import BiPoly, PolyError, UPoly, resultant, rational_roots, strip_roots, ugcd, ugcd_many
from .runtime import (
    FaultedTransitionError,
    PermanentActionError,
    RunConfig,
    RunResult,
    current_cancel_event,
    run,
)

CHART = "chart"
CLASSIFIED = "classified"

SMOOTH = "smooth"
SINGULAR = "singular"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Chart:
    chart_id: str
    level: int
    payload: Any = None

    def to_payload(self) -> tuple:
        return (self.chart_id, self.level, self.payload)

    @classmethod
    def from_payload(cls, p) -> Chart:
        return cls(p[0], p[1], p[2])


@dataclass(frozen=True)
class SingularWitness:
    chart_id: str
    certificate: Any = None


class Smooth:
    """Jacobian verdict for a chart with no singular point."""

    def __repr__(self) -> str:
        return "Smooth()"


SMOOTH_LEAF = Smooth()


class IndeterminateError(PermanentActionError):
    """The exact test cannot decide (candidate coordinates are irrational)."""


class ChartOracle(Protocol):
    def codim_reached(self, chart: Chart) -> bool: ...

    def descend(self, chart: Chart) -> list[Chart] | SingularWitness: ...

    def jacobian(self, chart: Chart) -> Smooth | SingularWitness: ...


@dataclass(frozen=True)
class Verdict:
    kind: str
    witness: SingularWitness | None = None
    diagnostic: str | None = None

    @property
    def smooth(self) -> bool:
        return self.kind == SMOOTH

    @property
    def singular(self) -> bool:
        return self.kind == SINGULAR


def build_smoothness_net() -> PetriNet:
    return PetriNet(
        (
            Place("i", CHART),
            Place("classified", CLASSIFIED),
            Place("o", CLASSIFIED, terminal=True),
        ),
        (
            Transition("desc", (Arc("i", "c"),), (Arc("classified", "r"),), guard="descend", action="desc"),
            Transition("Jac", (Arc("i", "c"),), (Arc("classified", "r"),), guard="codim", action="jac"),
            Transition("sing", (Arc("classified", "r"),), (Arc("o", "w"),), guard="has_witness", action="copy"),
            Transition("sm", (Arc("classified", "r"),), (), guard="finished", action="drop"),
            Transition(
                "respawn",
                (Arc("classified", "r"),),
                (Arc("i", "child"), Arc("classified", "rest")),
                guard="has_children",
                action="respawn",
            ),
        ),
    )


def _classified_witness(w: SingularWitness) -> TokenValue:
    return TokenValue(CLASSIFIED, (SINGULAR, w.chart_id, w.certificate))


def smoothness_registry(oracle: ChartOracle) -> Registry:
    reg = BUILTINS.extend()

    def chart_of(bound) -> Chart:
        return Chart.from_payload(bound["c"].payload)

    reg.guards["codim"] = lambda bound: bool(oracle.codim_reached(chart_of(bound)))
    reg.guards["descend"] = lambda bound: not oracle.codim_reached(chart_of(bound))
    reg.guards["has_witness"] = lambda bound: bound["r"].payload[0] == SINGULAR
    reg.guards["finished"] = lambda bound: bound["r"].payload[0] == SMOOTH or (
        bound["r"].payload[0] == "children" and not bound["r"].payload[1]
    )
    reg.guards["has_children"] = lambda bound: bound["r"].payload[0] == "children" and bool(bound["r"].payload[1])

    @reg.action("desc")
    def _desc(bound):
        out = oracle.descend(chart_of(bound))
        if isinstance(out, SingularWitness):
            return _classified_witness(out)
        return TokenValue(CLASSIFIED, ("children", tuple(c.to_payload() for c in out)))

    @reg.action("jac")
    def _jac(bound):
        c = chart_of(bound)
        out = oracle.jacobian(c)
        if isinstance(out, SingularWitness):
            return _classified_witness(out)
        return TokenValue(CLASSIFIED, (SMOOTH, c.chart_id))

    @reg.action("respawn")
    def _respawn(bound):
        children = bound["r"].payload[1]
        return {"child": TokenValue(CHART, children[0]), "rest": TokenValue(CLASSIFIED, ("children", children[1:]))}

    return reg


@dataclass
class SmoothnessResult:
    verdict: Verdict
    charts_evaluated: int
    charts_total: int
    charts_spawned: int
    wall_ms: float
    run: RunResult | None = None
    net: PetriNet | None = None
    initial: Marking | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"verdict": self.verdict.kind}
        if self.verdict.witness is not None:
            out["witness"] = {
                "chart": self.verdict.witness.chart_id,
                "certificate": certificate_json(self.verdict.witness.certificate),
            }
        if self.verdict.diagnostic:
            out["diagnostic"] = self.verdict.diagnostic
        out["charts_evaluated"] = self.charts_evaluated
        out["charts_total"] = self.charts_total
        out["wall_ms"] = self.wall_ms
        return out


def certificate_json(cert) -> Any:
    """Certificates travel in tokens as ``((key, value), ...)``; render them as JSON objects."""
    if isinstance(cert, tuple) and all(isinstance(kv, tuple) and len(kv) == 2 and isinstance(kv[0], str) for kv in cert):
        return {k: certificate_json(v) for k, v in cert}
    if isinstance(cert, tuple):
        return [certificate_json(v) for v in cert]
    return cert


def smoothness_marking(roots: Sequence[Chart]) -> Marking:
    return Marking.of({"i": [TokenValue(CHART, c.to_payload()) for c in roots]})


def run_smoothness(oracle: ChartOracle, roots: Sequence[Chart], config: RunConfig | None = None) -> SmoothnessResult:
    """Search the chart tree; the first committed singularity certificate ends the run."""
    config = config or RunConfig()
    net = build_smoothness_net()
    initial = smoothness_marking(roots)
    t0 = time.perf_counter()
    try:
        result = run(net, initial, config, smoothness_registry(oracle))
    except FaultedTransitionError as exc:
        if exc.kind != IndeterminateError.__name__:
            raise
        wall = (time.perf_counter() - t0) * 1000
        total = _total(oracle, len(roots))
        return SmoothnessResult(Verdict(INDETERMINATE, diagnostic=str(exc.cause)), 0, total, len(roots), wall, None, net, initial)
    wall = (time.perf_counter() - t0) * 1000
    per = result.stats.per_transition
    evaluated = per.get("desc", 0) + per.get("Jac", 0)
    spawned = len(roots) + per.get("respawn", 0)
    if result.cancelled:
        (tok,) = result.final.tokens("o").values()
        _, chart_id, cert = tok.payload
        verdict = Verdict(SINGULAR, SingularWitness(chart_id, cert))
    else:
        verdict = Verdict(SMOOTH)
    return SmoothnessResult(verdict, evaluated, _total(oracle, spawned), spawned, wall, result, net, initial)


def _total(oracle, fallback: int) -> int:
    fn = getattr(oracle, "total_charts", None)
    return fn() if fn else fallback


# ---------------------------------------------------------------- synthetic oracle

def child_path(parent: str, k: int) -> str:
    return str(k) if parent == "" else f"{parent}.{k}"


def path_length(path: str) -> int:
    return 0 if path == "" else path.count(".") + 1


class SyntheticOracle:
    """Full ``branching``-ary chart tree of the given depth with a tunable per-call cost.

    Interior charts descend, depth-``depth`` charts are leaves, and exactly
    the leaves listed in ``singular_leaves`` yield a singularity witness.
    ``cost_mode="spin"`` burns CPU for ``cost_ms`` per call; ``"sleep"``
    waits instead (useful to model latency-bound work).
    """

    def __init__(
        self,
        seed: int,
        branching: int,
        depth: int,
        cost_ms: float = 0.0,
        singular_leaves: Sequence[str] = (),
        cost_mode: str = "spin",
    ):
        if branching < 1 or depth < 0:
            raise ValueError("need branching >= 1 and depth >= 0")
        if cost_mode not in ("spin", "sleep"):
            raise ValueError(f"unknown cost mode {cost_mode!r}")
        self.seed = int(seed)
        self.branching = int(branching)
        self.depth = int(depth)
        self.cost_ms = float(cost_ms)
        self.cost_mode = cost_mode
        self.singular_leaves = frozenset(singular_leaves)
        for p in self.singular_leaves:
            if not self.is_leaf_path(p):
                raise ValueError(f"{p!r} is not a leaf of this tree")

    @classmethod
    def from_json(cls, data: dict) -> SyntheticOracle:
        return cls(
            int(data.get("seed", 0)),
            int(data["branching"]),
            int(data["depth"]),
            float(data.get("cost_ms", 0.0)),
            tuple(data.get("singular_leaves", ())),
            data.get("cost_mode", "spin"),
        )

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "branching": self.branching,
            "depth": self.depth,
            "cost_ms": self.cost_ms,
            "singular_leaves": sorted(self.singular_leaves),
            "cost_mode": self.cost_mode,
        }

    def is_leaf_path(self, p: str) -> bool:
        parts = p.split(".") if p else []
        return len(parts) == self.depth and all(x.isdigit() and int(x) < self.branching for x in parts)

    def _label(self, path: str) -> int:
        h = hashlib.blake2b(f"{self.seed}/{path}".encode(), digest_size=4)
        return int.from_bytes(h.digest(), "big")

    def roots(self) -> list[Chart]:
        return [Chart("", self.depth, self._label(""))]

    def total_charts(self) -> int:
        b, d = self.branching, self.depth
        return d + 1 if b == 1 else (b ** (d + 1) - 1) // (b - 1)

    def leaves(self) -> list[str]:
        paths = [""]
        for _ in range(self.depth):
            paths = [child_path(p, k) for p in paths for k in range(self.branching)]
        return paths

    def _work(self) -> None:
        if self.cost_ms <= 0:
            return
        if self.cost_mode == "sleep":
            time.sleep(self.cost_ms / 1000.0)
        else:
            _kernels.busy_wait(self.cost_ms, current_cancel_event())

    def codim_reached(self, chart: Chart) -> bool:
        return chart.level == 0

    def descend(self, chart: Chart) -> list[Chart]:
        self._work()
        return [
            Chart(child_path(chart.chart_id, k), chart.level - 1, self._label(child_path(chart.chart_id, k)))
            for k in range(self.branching)
        ]

    def jacobian(self, chart: Chart) -> Smooth | SingularWitness:
        self._work()
        if chart.chart_id in self.singular_leaves:
            return SingularWitness(chart.chart_id, (("leaf", chart.chart_id), ("label", chart.payload)))
        return SMOOTH_LEAF


def synthetic_oracle(seed, branching, depth, cost_ms=0.0, singular_leaves=(), cost_mode="spin") -> SyntheticOracle:
    return SyntheticOracle(seed, branching, depth, cost_ms, singular_leaves, cost_mode)


# ---------------------------------------------------------------- plane curves

def _frac_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


class PlaneCurveOracle:
    """Exact singularity test for an affine plane curve ``f(x, y) = 0`` over C.

    Leaf-only: the single root chart goes straight to the Jacobian test.
    After a shear ``x -> x + lam*y`` that makes ``f`` monic in ``y`` (up to
    a constant), singular points project to common roots of
    ``Res_y(f, f_x)`` and ``Res_y(f, f_y)``.  Rational candidates are checked
    exactly; irrational ones make the oracle refuse to answer.
    """

    def __init__(self, f: BiPoly):
        if f.is_zero():
            raise PolyError("the zero polynomial does not define a curve")
        self.f = f
        self.shear = 0
        if f.total_degree >= 1:
            while f.top_form_at(self.shear) == 0:
                self.shear += 1
        self.g = f.shear(self.shear)
        self.gx = self.g.dx()
        self.gy = self.g.dy()
        one = UPoly.const(1)
        if f.total_degree >= 1:
            self._res_y = resultant(self.g.as_y_poly(), self.gy.as_y_poly(), one)
            if self._res_y.is_zero():
                raise PolyError("polynomial is not squarefree")
        else:
            self._res_y = one

    def roots(self) -> list[Chart]:
        return [Chart("", 0, None)]

    def codim_reached(self, chart: Chart) -> bool:
        return True

    def descend(self, chart: Chart):
        raise PermanentActionError("plane-curve charts do not descend")

    def candidate_polynomial(self) -> UPoly:
        """``gcd(Res_y(f, f_x), Res_y(f, f_y))`` in sheared coordinates (monic)."""
        if self.f.total_degree < 1:
            return UPoly.const(1)
        res_x = resultant(self.g.as_y_poly(), self.gx.as_y_poly(), UPoly.const(1))
        return ugcd(res_x, self._res_y)

    def jacobian(self, chart: Chart) -> Smooth | SingularWitness:
        if self.f.total_degree < 1:
            return SMOOTH_LEAF  # nonzero constant: empty curve
        R = self.candidate_polynomial()
        if R.deg < 1:
            return SMOOTH_LEAF
        roots = rational_roots(R)
        for a in roots:
            h = ugcd_many([self.g.at_x(a), self.gx.at_x(a), self.gy.at_x(a)])
            if h.deg >= 1:
                return SingularWitness(chart.chart_id, self._certificate(a, h))
        rest = strip_roots(R, roots)
        if rest.deg >= 1:
            raise IndeterminateError(
                "singular candidates at irrational x (sheared by "
                f"{self.shear}): roots of {[_frac_str(v) for v in rest.monic().c]}"
            )
        return SMOOTH_LEAF

    def _certificate(self, a: Fraction, h: UPoly) -> tuple:
        cert = [("a", _frac_str(a)), ("shear", self.shear), ("gcd", tuple(_frac_str(v) for v in h.c))]
        ys = rational_roots(h)
        if ys:
            y0 = ys[0]
            cert.append(("point", (_frac_str(a + self.shear * y0), _frac_str(y0))))
        return tuple(cert)

    def verdict(self) -> Verdict:
        """Sequential evaluation (no engine); used as a reference."""
        try:
            out = self.jacobian(self.roots()[0])
        except IndeterminateError as exc:
            return Verdict(INDETERMINATE, diagnostic=str(exc))
        return Verdict(SMOOTH) if isinstance(out, Smooth) else Verdict(SINGULAR, out)


def plane_curve_oracle(f: BiPoly) -> PlaneCurveOracle:
    return PlaneCurveOracle(f)


def load_smooth_spec(path):
    """Return ``(oracle, roots)`` from a polynomial (JSON list) or synthetic-tree (JSON object) file."""
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, list):
        oracle = PlaneCurveOracle(BiPoly.from_json(data))
    elif isinstance(data, dict):
        oracle = SyntheticOracle.from_json(data)
    else:
        raise ValueError("smoothness spec must be a monomial list or a synthetic-tree object")
    return oracle, oracle.roots()
