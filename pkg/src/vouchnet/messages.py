"""Protocol message types shared by the credibility and authentication layers.

Each message knows its canonical wire form. MACs are always computed over
``mac_message`` output, never over an ad-hoc string, so sender and verifier
agree on the exact bytes being authenticated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .apps import AppId
from .crypto import Digest, MacTag
from .wire import encode_fields

# Acceptance decision reasons.
REASON_QUORUM = "quorum-reached"
REASON_INSUFFICIENT = "insufficient-verdicts"
REASON_FINGERPRINT = "fingerprint-mismatch"
REASON_NO_VERIFIERS = "no-verifiers"


def mac_message(app_id: AppId, digest: Digest) -> bytes:
    """The bytes a sender authenticates: app identity bound to a digest."""
    return encode_fields("mac", app_id.name, app_id.version, digest.bits)


@dataclass(frozen=True)
class CallOut:
    requester: int
    app_id: AppId
    round_no: int

    def wire(self) -> bytes:
        return encode_fields("call_out", self.requester, self.app_id.name,
                             self.app_id.version, self.round_no)


@dataclass(frozen=True)
class FingerprintReply:
    responder: int
    app_id: AppId
    digest: Digest
    key_length_bits: int

    def wire(self) -> bytes:
        return encode_fields("reply", self.responder, self.app_id.name,
                             self.app_id.version, self.digest.bits, self.key_length_bits)


@dataclass(frozen=True)
class VoteOutcome:
    app_id: AppId
    majority_digest: Digest
    supporters: tuple[int, ...]
    dissenters: tuple[int, ...]
    dissent_digests: dict[int, Digest] = field(hash=False)
    unanimous: bool

    @property
    def responders(self) -> tuple[int, ...]:
        return tuple(sorted(self.supporters + self.dissenters))


@dataclass(frozen=True)
class SuspicionNotice:
    sender: int
    target: int
    app_id: AppId
    suspected_digest: Digest
    majority_digest: Digest

    def wire(self) -> bytes:
        return encode_fields("notice", self.sender, self.target, self.app_id.name,
                             self.app_id.version, self.suspected_digest.bits,
                             self.majority_digest.bits)


@dataclass(frozen=True)
class AuthPackage:
    """An app delivery: payload, the digest the sender claims, and one MAC
    per chosen neighbor binding the app id to that digest."""

    sender: int
    app_id: AppId
    payload: bytes
    claimed_digest: Digest
    macs: tuple[tuple[int, MacTag], ...]

    def verifier_ids(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.macs)

    def wire(self) -> bytes:
        fields: list[bytes | int | str] = ["delivery", self.sender, self.app_id.name,
                                           self.app_id.version, self.payload,
                                           self.claimed_digest.bits]
        for verifier, tag in self.macs:
            fields.append(verifier)
            fields.append(tag.tag)
        return encode_fields(*fields)


@dataclass(frozen=True)
class VerifyRequest:
    requester: int
    sender: int
    verifier: int
    app_id: AppId
    digest: Digest
    tag: MacTag

    def wire(self) -> bytes:
        return encode_fields("verify_req", self.requester, self.sender, self.verifier,
                             self.app_id.name, self.app_id.version,
                             self.digest.bits, self.tag.tag)


@dataclass(frozen=True)
class VerifyReply:
    verifier: int
    verdict: bool

    def wire(self) -> bytes:
        return encode_fields("verify_reply", self.verifier, self.verdict)


@dataclass(frozen=True)
class AcceptanceDecision:
    accepted: bool
    reason: str
    positives: int
    total_polled: int
