"""Run trace: the ordered event log and per-retrieval slices of it.

The log is the ground truth a run is judged by. Its digest is computed
over a canonical byte serialization, so two runs agree exactly when their
logs agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .crypto import DEFAULT_WIDTH_BITS, Digest, fingerprint
from .wire import encode_fields

# Event kinds. Message-kind events carry nonzero cost-model bits and belong
# to exactly one retrieval; bookkeeping events carry zero bits.
EV_EPOCH = "epoch"
EV_JOIN = "join"
EV_LEAVE = "leave"
EV_SEVER = "sever"
EV_LINK = "link"
EV_STORE_REFRESH = "store_refresh"
EV_CALL_OUT = "call_out"
EV_REPLY = "reply"
EV_OLD_FILTERED = "old_filtered"
EV_VOTE = "vote"
EV_NOTICE = "notice"
EV_SOURCE = "source"
EV_DELIVERY = "delivery"
EV_VERIFY_REQ = "verify_req"
EV_VERIFY_REPLY = "verify_reply"
EV_DECISION = "decision"
EV_INSTALL = "install"
EV_STORE_FETCH = "store_fetch"

MESSAGE_KINDS = frozenset({EV_REPLY, EV_DELIVERY, EV_VERIFY_REQ, EV_VERIFY_REPLY})


@dataclass(frozen=True)
class EventRecord:
    tick: int
    kind: str
    data: dict[str, str] = field(hash=False)
    bits: int = 0
    retrieval: int | None = None

    def wire(self) -> bytes:
        fields: list[bytes | int | str] = [
            self.tick, self.kind,
            self.retrieval if self.retrieval is not None else -1,
            self.bits,
        ]
        for key in sorted(self.data):
            fields.append(f"{key}={self.data[key]}")
        return encode_fields(*fields)

    def to_json_dict(self) -> dict:
        out: dict = {"tick": self.tick, "kind": self.kind, "bits": self.bits}
        if self.retrieval is not None:
            out["retrieval"] = self.retrieval
        out.update(sorted(self.data.items()))
        return out


class EventLog:
    """Append-only, tick-ordered record of everything a run did."""

    def __init__(self, width_bits: int = DEFAULT_WIDTH_BITS) -> None:
        self.width_bits = width_bits
        self.records: list[EventRecord] = []
        self._tick = 0

    @property
    def tick(self) -> int:
        return self._tick

    def advance_tick(self) -> int:
        """Each protocol message costs one tick."""
        self._tick += 1
        return self._tick

    def append(self, kind: str, data: dict[str, str], bits: int = 0,
               retrieval: int | None = None, message: bool = False) -> EventRecord:
        tick = self.advance_tick() if message else self._tick
        record = EventRecord(tick=tick, kind=kind, data=dict(data),
                             bits=bits, retrieval=retrieval)
        self.records.append(record)
        return record

    def by_kind(self, kind: str) -> list[EventRecord]:
        return [r for r in self.records if r.kind == kind]

    def canonical_bytes(self) -> bytes:
        return b"".join(r.wire() for r in self.records)

    def digest(self) -> Digest:
        return fingerprint(self.canonical_bytes(), self.width_bits)

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class RetrievalTrace:
    """The slice of a run belonging to one retrieval attempt."""

    retrieval: int
    epoch: int
    requester: int
    app_label: str
    events: list[EventRecord] = field(default_factory=list)
    accepted: bool = False
    reason: str = ""
    infected_install: bool = False
    payload_bytes: int = 0
    responders: int = 0
    mac_count: int = 0
