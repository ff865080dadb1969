"""Combinatorial / topological stability checks and perturbation harness.

A network is combinatorially stable over a box when the canonical-complex
construction never routes a pullback hyperplane through a vertex of the region
it splits and never produces a degenerate (identically zero) pullback;
topological stability additionally requires the output zero-set to avoid all
vertices of the final complex.  Stable networks keep the decision-region
topology under small weight perturbations, which the perturbation harness
confirms empirically by recomputing exact Betti vectors for seeded rational
perturbations of all parameters.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .arrangement import _Builder
from .constructions import BettiVector
from .exactgeom import BoxDomain, format_rational
from .relunet import AffineLayer, NeuronId, ReluNetwork


@dataclass(frozen=True)
class StabilityReport:
    combinatorially_stable: bool
    topologically_stable: bool
    violations: tuple  # (NeuronId, region-id, reason)
    certified_delta: Optional[Fraction] = None
    trials: int = 0
    seed: int = 0
    applicable: bool = True

    def to_json(self) -> dict:
        return {
            "combinatorially_stable": self.combinatorially_stable,
            "topologically_stable": self.topologically_stable,
            "violations": [
                {"layer": nid.layer, "index": nid.index, "region": rid, "reason": reason}
                for nid, rid, reason in self.violations
            ],
            "certified_delta": (
                None if self.certified_delta is None else format_rational(self.certified_delta)
            ),
            "trials": self.trials,
            "seed": self.seed,
            "applicable": self.applicable,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def check_stability(net: ReluNetwork, box: BoxDomain) -> StabilityReport:
    """Replay the canonical-complex construction, collecting violations.

    Hidden neurons violate stability when their pullback hyperplane passes
    through a vertex of a region it properly splits, or when their pullback is
    identically zero on a region; supporting hyperplanes that merely touch a
    region's boundary do not count, since they do not split anything.  The
    output neuron's zero-set must avoid every vertex of the final complex.
    """
    if net.output_dim != 1:
        raise ValueError("stability check requires a scalar-output network")
    events = []

    def observer(reason: str, nid: NeuronId, rid: int):
        events.append((nid, rid, reason))

    b = _Builder(net, box, observer)
    b.run_hidden()
    b.run_output()
    output_layer = len(net.layers)
    hidden_violations = [e for e in events if e[0].layer != output_layer]
    comb = not hidden_violations
    top = comb and not events
    return StabilityReport(
        combinatorially_stable=comb,
        topologically_stable=top,
        violations=tuple(events),
    )


def _perturbed(net: ReluNetwork, delta: Fraction, rng: random.Random) -> ReluNetwork:
    # uniform rationals in [−delta, +delta] with resolution delta/10^6
    res = 10**6
    layers = []
    for layer in net.layers:
        weights = tuple(
            tuple(v + Fraction(rng.randint(-res, res), res) * delta for v in row)
            for row in layer.weights
        )
        bias = tuple(v + Fraction(rng.randint(-res, res), res) * delta for v in layer.bias)
        layers.append(AffineLayer(weights, bias))
    return ReluNetwork(tuple(layers))


def perturbation_test(
    net: ReluNetwork,
    box: BoxDomain,
    delta: Fraction,
    trials: int,
    seed: int,
    max_halvings: int = 8,
) -> StabilityReport:
    """Check that seeded weight perturbations leave the Betti vector unchanged.

    Each trial perturbs every weight and bias by an independent uniform
    rational in [−delta, +delta] and recomputes the exact Betti vector.  If
    any trial disagrees with the baseline, delta is halved (up to
    max_halvings) and all trials rerun; the report carries the largest delta
    at which every trial agreed, or no certificate if none was found.  The
    result is evidence at the tested scale, not a proof.
    """
    from .homology import analyze_network

    if trials <= 0:
        raise ValueError("trials must be positive")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    base = check_stability(net, box)
    if not base.topologically_stable:
        return StabilityReport(
            combinatorially_stable=base.combinatorially_stable,
            topologically_stable=base.topologically_stable,
            violations=base.violations,
            certified_delta=None,
            trials=trials,
            seed=seed,
            applicable=False,
        )
    baseline = analyze_network(net, box).betti

    def all_agree(cur: Fraction) -> bool:
        for t in range(trials):
            rng = random.Random(f"{seed}:{t}")
            perturbed = _perturbed(net, cur, rng)
            if analyze_network(perturbed, box).betti.values != baseline.values:
                return False
        return True

    certified = None
    cur = Fraction(delta)
    for _ in range(max_halvings + 1):
        if all_agree(cur):
            certified = cur
            break
        if cur == 0:
            break
        cur = cur / 2
    return StabilityReport(
        combinatorially_stable=True,
        topologically_stable=True,
        violations=(),
        certified_delta=certified,
        trials=trials,
        seed=seed,
    )
