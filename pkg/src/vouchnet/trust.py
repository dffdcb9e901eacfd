"""Subjective trust bookkeeping.

Each device keeps, per peer, an estimated response probability and a
conditional trust in what the peer says when it does respond. A poll's
combined trust is the response-weighted convex combination of the
responders' conditional trusts; weights are normalized over the polled
subset so the result stays inside [0, 1] even though the underlying
events do not partition anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import NonResponderError, VouchnetError

STRANGER_RESP = 0.5
STRANGER_COND = 0.5
DEFAULT_ALPHA = 0.1


@dataclass
class TrustRecord:
    resp_prob: float = STRANGER_RESP
    cond_trust: float = STRANGER_COND
    observations: int = 0


class Ledger:
    """One device's trust records about its peers."""

    def __init__(self, owner: int, alpha: float = DEFAULT_ALPHA) -> None:
        if not 0.0 < alpha <= 1.0:
            raise VouchnetError(f"smoothing factor {alpha} outside (0, 1]")
        self.owner = owner
        self.alpha = alpha
        self._records: dict[int, TrustRecord] = {}

    def get_record(self, peer: int) -> TrustRecord:
        """Current record; strangers read as the (0.5, 0.5) prior."""
        rec = self._records.get(peer)
        return rec if rec is not None else TrustRecord()

    def known_peers(self) -> list[int]:
        return sorted(self._records)

    def _touch(self, peer: int) -> TrustRecord:
        rec = self._records.get(peer)
        if rec is None:
            rec = TrustRecord()
            self._records[peer] = rec
        return rec

    def drop_peer(self, peer: int) -> None:
        self._records.pop(peer, None)


def update_response(ledger: Ledger, peer: int, responded: bool) -> TrustRecord:
    """Exponentially smooth the response estimate toward 1 or 0."""
    rec = ledger._touch(peer)
    target = 1.0 if responded else 0.0
    rec.resp_prob = (1.0 - ledger.alpha) * rec.resp_prob + ledger.alpha * target
    rec.observations += 1
    return rec


def update_correctness(ledger: Ledger, peer: int, agreed_with_majority: bool,
                       responders: Iterable[int] | None = None) -> TrustRecord:
    """Smooth conditional trust after a vote the peer took part in.

    ``responders`` is the round's responder set when the caller has one;
    scoring a peer outside it is a protocol violation, not a zero-credit
    observation, so it raises.
    """
    if responders is not None and peer not in set(responders):
        raise NonResponderError(f"peer {peer} did not respond in the scored round")
    rec = ledger._touch(peer)
    target = 1.0 if agreed_with_majority else 0.0
    rec.cond_trust = (1.0 - ledger.alpha) * rec.cond_trust + ledger.alpha * target
    return rec


def subjective_trust(ledger: Ledger, responders: Sequence[int]) -> float:
    """Combined trust in a poll outcome, given who responded.

    Weights are the responders' response probabilities normalized over the
    polled subset; if every weight is zero the responders count equally.
    """
    if not responders:
        raise VouchnetError("subjective trust over an empty responder set is undefined")
    records = [ledger.get_record(p) for p in responders]
    total = sum(r.resp_prob for r in records)
    if total == 0.0:
        return sum(r.cond_trust for r in records) / len(records)
    return sum(r.cond_trust * (r.resp_prob / total) for r in records)


def combined_trust(ledger: Ledger, peer: int) -> float:
    """Trust in a single peer as a collaborator.

    Response-weighted correctness, rescaled so the maximum-uncertainty
    stranger reads 0.5, capped at 1. A peer that stops answering decays
    toward 0 regardless of how good its past answers were; link severance
    and formation utilities key on exactly that.
    """
    rec = ledger.get_record(peer)
    return min(1.0, 2.0 * rec.resp_prob * rec.cond_trust)
