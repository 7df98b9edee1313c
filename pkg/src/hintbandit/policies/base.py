"""The policy interface.

A policy is driven by the harness through ``next_action()`` followed by
exactly one ``observe(reward)``. Concrete policies write their logic as a
generator in ``_play``: each ``yield`` hands out an action and evaluates to
the reward observed for it. Policies never hold a reference to the
environment or the instance.
"""

from ..errors import StateError


class Policy:
    """Base class for generator-driven policies.

    Attributes:
        rounds: number of rewards observed so far.
        phase: label of the current phase, written to traces.
        events: list of dicts describing phase transitions.
    """

    phase = "play"

    def __init__(self):
        self.rounds = 0
        self.events = []
        self._gen = None
        self._next = None
        self._pending = False

    def _play(self):
        raise NotImplementedError

    def next_action(self):
        if self._pending:
            raise StateError("observe() must be called before the next action")
        if self._gen is None:
            self._gen = self._play()
            self._next = next(self._gen)
        self._pending = True
        return self._next

    def observe(self, reward):
        if not self._pending:
            raise StateError("observe() called without a pending action")
        self._pending = False
        self.rounds += 1
        try:
            self._next = self._gen.send(reward)
        except StopIteration:
            raise StateError(f"{type(self).__name__} stopped producing actions") from None

    def _event(self, **info):
        self.events.append({"round": self.rounds, **info})

    def delegate(self, other, track=False):
        """Generator that hands every round to another policy.

        With ``track`` the delegate's phase label and events are mirrored
        here, event rounds shifted to this policy's clock.
        """
        offset = self.rounds
        seen = 0
        while True:
            if track:
                self.phase = other.phase
            reward = yield other.next_action()
            other.observe(reward)
            if track and len(other.events) > seen:
                for ev in other.events[seen:]:
                    self.events.append({**ev, "round": ev["round"] + offset})
                seen = len(other.events)


def run_policy(policy, env, rounds=None):
    """Play ``policy`` against ``env`` until its horizon (or ``rounds``) is used up."""
    n = env.rounds_left if rounds is None else rounds
    for _ in range(n):
        a = policy.next_action()
        policy.observe(env.pull(a))
    return env.ledger
