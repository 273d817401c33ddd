"""Risk attractor, nested risk attractor and boundary transitions."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from .game import bad_states

logger = logging.getLogger(__name__)


@dataclass
class AttractorResult:
    nested: object  # states the environment can force into bad ones, given visibility
    boundary: object  # control moves from outside ``nested`` into it
    plain: object  # last inner attractor
    iterations: int


def analysis_region(enc, bad):
    """States reachable from ``init`` without moving on from a bad state.

    A play is lost once it visits a bad state, so successors of bad states
    do not take part in the game.
    """
    region = frontier = enc.init
    while not frontier.is_false:
        live = frontier - bad
        new = enc.image(live, enc.t_ctrl) | enc.image(live, enc.t_env)
        frontier = new - region
        region = region | frontier
    return region


def risk_attractor(bad, enc, region=None):
    """Least fixpoint of the environment attractor step.

    Environment states join when some move reaches the set; control states
    join when they have moves and all of them reach the set.  Moves are
    restricted to sources in ``region`` (default: all reachable states).
    """
    if region is None:
        region = enc.reach
    t_ctrl, t_env = enc.t_ctrl & region, enc.t_env & region
    has_ctrl = t_ctrl.exists(enc.primed)
    attr = bad
    while True:
        env_pre = enc.preimage(attr, t_env)
        # control states with a move leaving the set
        ctrl_out = enc.preimage(~attr, t_ctrl)
        new = attr | env_pre | (has_ctrl - ctrl_out)
        if new == attr:
            return attr
        attr = new


def esc_predicate(enc):
    """Control moves whose chosen interaction sees no other enabled interaction."""
    vd = enc.vd
    alphabet = enc.system.alphabet
    out = vd.false
    for s in alphabet:
        term = enc.enc(s, prime=True) & enc.bit(s, prime=True)
        for other in alphabet:
            if other != s:
                term = term & ~enc.bit(other, prime=True)
        out = out | term
    return out


def _boundary(enc, t_ctrl, inside):
    point_to = t_ctrl & inside.swap_primed()
    outside = ~inside & t_ctrl.exists(enc.primed)
    return point_to & outside


def nested_risk_attractor(enc, bad=None, over_approx=False):
    """Grow the attractor by control states forced in by architectural blindness.

    Each round computes the plain attractor, looks at control moves from
    outside into it, and adds their sources when the move has no visible
    escape (or every source, with ``over_approx``).
    """
    if bad is None:
        bad = bad_states(enc)
    region = analysis_region(enc, bad)
    bad = bad & region
    t_ctrl = enc.t_ctrl & region
    esc = esc_predicate(enc)
    pre = bad
    rounds = 0
    while True:
        rounds += 1
        attr = risk_attractor(pre, enc, region)
        t = _boundary(enc, t_ctrl, attr)
        if over_approx:
            new_bad = t.exists(enc.primed)
        else:
            new_bad = (t & esc).exists(enc.primed)
        post = attr | new_bad
        logger.debug("nested attractor round %d", rounds)
        if post == pre:
            break
        pre = post
    boundary = _boundary(enc, t_ctrl, pre)
    return AttractorResult(pre, boundary, attr, rounds)


def check_feasible(enc, result):
    """False when the initial state lies in the nested attractor."""
    return (enc.init & result.nested).is_false
