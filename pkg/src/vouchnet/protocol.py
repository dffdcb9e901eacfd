"""Multi-peer credibility checking.

Before installing an app from a community member, a device calls out for
fingerprints of the same app, drops replies from devices whose pairwise
keys are too old to matter, takes a majority vote over the remaining
digests, picks its source among the supporters, and warns the dissenters
that their copies look corrupted.
"""

from __future__ import annotations

import random
from collections import Counter
from typing import Callable, Iterable, Sequence

from .apps import AppId, InstallState
from .community import CommunityGraph
from .crypto import MIN_KEY_BITS, DEFAULT_WIDTH_BITS
from .errors import NoMajorityError, NoSourceError
from .messages import CallOut, FingerprintReply, SuspicionNotice, VoteOutcome

Interceptor = Callable[[int, object], object]


def broadcast_call_out(requester: int, app_id: AppId, round_no: int,
                       graph: CommunityGraph, installs: InstallState,
                       width_bits: int = DEFAULT_WIDTH_BITS,
                       hop_limit: int | None = None,
                       interceptor: Interceptor | None = None,
                       ) -> tuple[CallOut, list[FingerprintReply], list[int]]:
    """Ask the reachable community for fingerprints of one app.

    Every reachable holder answers with the digest of its own copy, subject
    to its behavior (the interceptor may rewrite or swallow a reply).
    Returns the call-out, the replies in responder-id order, and the full
    polled set so the caller can score silence.
    """
    call = CallOut(requester=requester, app_id=app_id, round_no=round_no)
    polled = graph.reachable_from(requester, hop_limit)
    replies: list[FingerprintReply] = []
    for node in polled:
        package = installs.get(node, app_id)
        if package is None:
            continue  # nothing to report; silence is not an offence here
        reply = FingerprintReply(responder=node, app_id=app_id,
                                 digest=package.fingerprint(width_bits),
                                 key_length_bits=graph.nodes[node].key_length_bits)
        if interceptor is not None:
            reply = interceptor(node, reply)
        if reply is not None:
            replies.append(reply)
    return call, replies, polled


def filter_old_devices(replies: Iterable[FingerprintReply],
                       min_key_bits: int = MIN_KEY_BITS) -> list[FingerprintReply]:
    """Keep only replies from devices with acceptably fresh key material."""
    return [r for r in replies if r.key_length_bits >= min_key_bits]


def majority_vote(replies: Sequence[FingerprintReply]) -> VoteOutcome:
    """Group replies by digest; the largest class wins.

    A tie between the largest classes raises: with no majority the device
    has to fall back to the store instead of guessing.
    """
    if not replies:
        raise NoSourceError("no fingerprint replies to vote over")
    app_id = replies[0].app_id
    tally = Counter(r.digest for r in replies)
    ranked = tally.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        ways = sum(1 for _, c in ranked if c == ranked[0][1])
        raise NoMajorityError(
            f"{ways}-way tie between fingerprint classes for {app_id.label()}")
    majority_digest = ranked[0][0]
    supporters = tuple(sorted(r.responder for r in replies if r.digest == majority_digest))
    dissent = {r.responder: r.digest for r in replies if r.digest != majority_digest}
    return VoteOutcome(app_id=app_id, majority_digest=majority_digest,
                       supporters=supporters,
                       dissenters=tuple(sorted(dissent)),
                       dissent_digests=dissent,
                       unanimous=not dissent)


def choose_source(outcome: VoteOutcome, rng: random.Random) -> int:
    """Pick the delivery source uniformly among the vote's supporters."""
    return rng.choice(list(outcome.supporters))


def notify_dissenters(outcome: VoteOutcome, requester: int) -> list[SuspicionNotice]:
    """Tell each dissenting holder which digest the community settled on."""
    return [SuspicionNotice(sender=requester, target=node, app_id=outcome.app_id,
                            suspected_digest=outcome.dissent_digests[node],
                            majority_digest=outcome.majority_digest)
            for node in outcome.dissenters]
