"""Population model and random pairwise scheduler.

A population is an indexed array of agent states. On each step the
scheduler draws a uniformly random ordered pair (initiator, responder)
and both agents update via the protocol's one-sided rule, applied to the
pre-interaction states of the pair.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from .rng import RngStream


class InvalidPopulationError(ValueError):
    pass


class Protocol:
    """One-sided pairwise update rule plus naming and output maps.

    `update(s, o, responder)` returns the new state of the agent currently
    in state `s` after meeting an agent in state `o`. The full interaction
    applies it twice, to (initiator, responder) and (responder, initiator),
    both from the pre-interaction states. `responder` breaks symmetry only
    where a rule needs it (e.g. equal-position clock ticks).
    """

    def update(self, s: Any, o: Any, responder: bool) -> Any:
        raise NotImplementedError

    def state_name(self, s: Any) -> str:
        return str(s)

    def output(self, s: Any) -> Optional[str]:
        return None


@dataclass
class AgentPopulation:
    agents: list

    def __post_init__(self):
        if len(self.agents) < 2:
            raise InvalidPopulationError("population size must be at least 2")

    @property
    def n(self) -> int:
        return len(self.agents)


@dataclass(frozen=True)
class InteractionEvent:
    step_index: int
    initiator_index: int
    responder_index: int
    before_pair: tuple
    after_pair: tuple


@dataclass
class ConvergenceReport:
    interactions_to_certificate: Optional[int]
    interactions_to_convergence: Optional[int]
    parallel_time_certificate: Optional[Fraction]
    final_config: Counter
    seed: int
    interactions: int = 0
    trace: Optional[list] = field(default=None, repr=False)


def select_pair(rng: RngStream, n: int) -> tuple[int, int]:
    """Uniform ordered pair of distinct agent indices."""
    if n < 2:
        raise InvalidPopulationError("need at least 2 agents to interact")
    i = rng.randbelow(n)
    j = rng.randbelow(n - 1)
    if j >= i:
        j += 1
    return i, j


def parallel_time(interactions: int, n: int) -> Fraction:
    if n < 1:
        raise InvalidPopulationError("population size must be positive")
    return Fraction(interactions, n)


def config_of(pop: AgentPopulation) -> Counter:
    return Counter(pop.agents)


def step(
    pop: AgentPopulation,
    protocol: Protocol,
    rng: RngStream,
    step_index: int = 0,
) -> InteractionEvent:
    i, j = select_pair(rng, pop.n)
    s, o = pop.agents[i], pop.agents[j]
    ns = protocol.update(s, o, False)
    no = protocol.update(o, s, True)
    pop.agents[i] = ns
    pop.agents[j] = no
    return InteractionEvent(step_index, i, j, (s, o), (ns, no))


def run_until(
    pop: AgentPopulation,
    protocol: Protocol,
    certificate: Callable[[Counter], bool],
    max_interactions: int,
    rng: RngStream,
    record_trace: bool = False,
) -> ConvergenceReport:
    """Drive the scheduler until the certificate fires or the budget runs out."""
    if max_interactions < 0:
        raise ValueError("max_interactions must be non-negative")
    n = pop.n
    trace: Optional[list] = [] if record_trace else None
    steps_done = 0
    cert_at: Optional[int] = None
    if certificate(config_of(pop)):
        cert_at = 0
    else:
        while steps_done < max_interactions:
            ev = step(pop, protocol, rng, steps_done)
            steps_done += 1
            if trace is not None:
                trace.append(ev)
            if certificate(config_of(pop)):
                cert_at = steps_done
                break
    conv_at: Optional[int] = None
    if trace is not None:
        # Last event whose interaction changed some agent's output; the run
        # has converged from that point on (retrospective, not a certificate).
        conv_at = 0
        for ev in reversed(trace):
            bo = tuple(protocol.output(s) for s in ev.before_pair)
            ao = tuple(protocol.output(s) for s in ev.after_pair)
            if bo != ao:
                conv_at = ev.step_index + 1
                break
    return ConvergenceReport(
        interactions_to_certificate=cert_at,
        interactions_to_convergence=conv_at,
        parallel_time_certificate=(
            parallel_time(cert_at, n) if cert_at is not None else None
        ),
        final_config=config_of(pop),
        seed=rng.seed,
        interactions=steps_done,
        trace=trace,
    )


def rumor_experiment(
    n: int,
    s: int,
    rng: RngStream,
    max_interactions: Optional[int] = None,
) -> int:
    """Interactions until all of a target set S of size `s` knows the rumor.

    S is the agents {0, .., s-1}. The source is agent `s` when s < n, else
    agent 0 (a member of S). An interaction informs an uninformed member of
    S when its partner is informed; agents outside S ∪ {source} never learn
    or spread the rumor.
    """
    if not 1 <= s <= n:
        raise ValueError("need 1 <= s <= n")
    if n < 2:
        raise InvalidPopulationError("population size must be at least 2")
    informed = [False] * n
    source = s if s < n else 0
    informed[source] = True
    members = s  # agents < s participate; the source participates too
    done = 1 if source < s else 0
    steps_done = 0
    while done < members:
        if max_interactions is not None and steps_done >= max_interactions:
            return -1
        i = rng.randbelow(n)
        j = rng.randbelow(n - 1)
        if j >= i:
            j += 1
        steps_done += 1
        for a, b in ((i, j), (j, i)):
            if informed[b] and not informed[a] and a < s:
                informed[a] = True
                done += 1
    return steps_done
