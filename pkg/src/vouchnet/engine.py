"""Deterministic discrete-event simulation of the full protocol.

One run is a pure function of (scenario, seed). Every random draw comes
from a labeled sub-generator of the root seed, dictionary walks are over
sorted keys, and each protocol message advances the integer tick, so two
runs of the same scenario produce bit-identical event logs.
"""

from __future__ import annotations

import math

from . import metrics as metrics_mod
from .adversary import Behavior, CompromisePlan, InterceptContext, assign_behaviors, intercept
from .apps import AppCatalog, AppId, AppPackage, InstallState, tamper
from .community import (
    CommunityGraph,
    NodeProfile,
    churn,
    designate_supernodes,
    homophily_index,
    propose_and_approve,
)
from .errors import (
    NoMajorityError,
    NoSourceError,
    NoVerifiersError,
    UndefinedHomophilyError,
)
from .events import (
    EV_CALL_OUT,
    EV_DECISION,
    EV_DELIVERY,
    EV_EPOCH,
    EV_INSTALL,
    EV_JOIN,
    EV_LEAVE,
    EV_LINK,
    EV_NOTICE,
    EV_OLD_FILTERED,
    EV_REPLY,
    EV_SEVER,
    EV_SOURCE,
    EV_STORE_FETCH,
    EV_STORE_REFRESH,
    EV_VERIFY_REPLY,
    EV_VERIFY_REQ,
    EV_VOTE,
    EventLog,
    RetrievalTrace,
)
from .messages import (
    REASON_FINGERPRINT,
    REASON_NO_VERIFIERS,
    AcceptanceDecision,
    VerifyReply,
)
from .multipath import build_auth_package, decide, toc_tou_check, verify_round
from .protocol import broadcast_call_out, choose_source, filter_old_devices, majority_vote, notify_dissenters
from .rng import derive_rng, derive_seed
from .scenario import Scenario
from .trust import Ledger, combined_trust, update_correctness, update_response

# Every run states what it takes on faith, so downstream consumers of the
# metrics can tell measured properties from modeling assumptions.
RUN_ASSUMPTIONS = (
    "fingerprint and verification replies are delivered unmodified unless a "
    "study knob says otherwise",
    "verifier compromise events are independent across paths",
)


def _ids_csv(ids) -> str:
    return "+".join(str(i) for i in sorted(ids))


class Simulation:
    """Mutable world state for one run. Build once, run once."""

    def __init__(self, scenario: Scenario, seed: int | None = None) -> None:
        scenario.validate()
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.width = scenario.protocol.digest_width_bits
        self.log = EventLog(width_bits=self.width)
        self.graph = CommunityGraph()
        self.catalog = AppCatalog(width_bits=self.width)
        self.installs = InstallState()
        self.ledgers: dict[int, Ledger] = {}
        self.rounds: dict[int, int] = {}
        self.flagged: set[tuple[int, str]] = set()
        self.retrieval_count = 0
        self.traces: list[RetrievalTrace] = []
        self.epoch_rows: list[metrics_mod.EpochMetrics] = []
        self.trust_samples: list[metrics_mod.TrustSample] = []
        self._setup()

    # -- construction ----------------------------------------------------

    def _setup(self) -> None:
        sc = self.scenario
        n = sc.node_count

        # Deterministic type allocation: largest-remainder over sorted
        # labels, assigned to ids in order. Balanced weights give exactly
        # balanced communities instead of a binomial approximation.
        labels = sorted(sc.type_distribution)
        total_w = sum(sc.type_distribution[t] for t in labels)
        counts = {t: math.floor(sc.type_distribution[t] / total_w * n) for t in labels}
        leftover = n - sum(counts.values())
        for t in labels[:leftover]:
            counts[t] += 1
        type_list: list[str] = []
        for t in labels:
            type_list.extend([t] * counts[t])

        old_rng = derive_rng(self.seed, "old_devices")
        old_count = math.floor(sc.old_devices.fraction * n)
        old_ids = set(old_rng.sample(range(n), old_count)) if old_count else set()

        for i in range(n):
            bits = sc.old_devices.key_bits if i in old_ids else sc.default_key_bits
            self.graph.add_node(NodeProfile(
                id=i, node_type=type_list[i], key_length_bits=bits,
                max_degree=sc.formation.max_degree))
            self.ledgers[i] = Ledger(i, alpha=sc.trust.smoothing_alpha)
            self.rounds[i] = 0

        key_rng = derive_rng(self.seed, "keys")
        if sc.topology == "complete":
            ids = self.graph.node_ids()
            for a in ids:
                for b in ids:
                    if a < b:
                        self.graph.add_edge(a, b, key_rng)
        for a, b in sc.initial_edges:
            if not self.graph.has_edge(a, b):
                self.graph.add_edge(a, b, key_rng)

        plan = CompromisePlan(fraction=sc.compromise.fraction,
                              mix=dict(sc.compromise.mix),
                              seed=derive_seed(self.seed, "compromise"))
        self.behaviors = assign_behaviors(self.graph, plan)
        for node, behavior in self.behaviors.items():
            self.graph.nodes[node].behavior = behavior

        for spec in sorted(sc.apps, key=lambda a: a.label()):
            app_id = AppId(spec.name, spec.version)
            payload = derive_rng(self.seed, "payload", spec.label()).randbytes(spec.payload_bytes)
            clean = self.catalog.publish_clean(app_id, payload)

            if spec.holders == "all":
                holders = list(range(n))
            elif isinstance(spec.holders, dict):
                frac = float(spec.holders["fraction"])
                k = math.floor(frac * n)
                holders = sorted(derive_rng(self.seed, "holders", spec.label())
                                 .sample(range(n), k))
            else:
                holders = sorted(set(spec.holders))

            if isinstance(spec.tampered_holders, dict):
                frac = float(spec.tampered_holders["fraction"])
                k = math.floor(frac * len(holders))
                pre = sorted(derive_rng(self.seed, "preinfect", spec.label())
                             .sample(holders, k)) if holders else []
            else:
                pre = sorted(set(spec.tampered_holders))
            holders = sorted(set(holders) | set(pre))

            # Compromised servers and swappers hold corrupted copies from
            # the start; one shared campaign variant unless configured
            # otherwise.
            serving = [h for h in holders
                       if self.behaviors.get(h) in (Behavior.TAMPERED_SERVER,
                                                    Behavior.TOCTTOU_SWAPPER)]
            campaign: AppPackage | None = None
            if serving and sc.compromise.shared_payload:
                campaign = tamper(clean, adversary=min(serving),
                                  rng=derive_rng(self.seed, "campaign", spec.label()),
                                  width_bits=self.width)

            for h in holders:
                if h in pre and h not in serving:
                    pkg = tamper(clean, adversary=h,
                                 rng=derive_rng(self.seed, "tamper", spec.label(), h),
                                 width_bits=self.width)
                elif h in serving:
                    pkg = campaign if campaign is not None else tamper(
                        clean, adversary=h,
                        rng=derive_rng(self.seed, "campaign", spec.label(), h),
                        width_bits=self.width)
                else:
                    pkg = clean
                self.installs.install(h, pkg)

        self.ictx = InterceptContext(catalog=self.catalog, keystores=self.graph.keystores)

    # -- helpers ---------------------------------------------------------

    def _behavior(self, node: int) -> Behavior:
        return self.behaviors.get(node, Behavior.HONEST)

    def _interceptor(self, node: int, message: object):
        return intercept(self._behavior(node), message, self.ictx)

    def _log(self, kind: str, data: dict, bits: int = 0, retrieval: int | None = None,
             message: bool = False, trace: RetrievalTrace | None = None):
        record = self.log.append(kind, {k: str(v) for k, v in data.items()},
                                 bits=bits, retrieval=retrieval, message=message)
        if trace is not None:
            trace.events.append(record)
        return record

    def _fallback_to_store(self, trace: RetrievalTrace, app_id: AppId, reason: str) -> None:
        """A failed community retrieval falls back to the store when it can."""
        if self.scenario.store_blocked or not self.catalog.has(app_id):
            return
        clean = self.catalog.clean_package(app_id)
        self.installs.install(trace.requester, clean)
        self._log(EV_STORE_FETCH, {"node": trace.requester, "app": app_id.label(),
                                   "reason": reason},
                  retrieval=trace.retrieval, trace=trace)
        self._log(EV_INSTALL, {"node": trace.requester, "app": app_id.label(),
                               "origin": clean.origin,
                               "digest": clean.fingerprint(self.width).hex()},
                  retrieval=trace.retrieval, trace=trace)

    # -- one retrieval -----------------------------------------------------

    def execute_retrieval(self, epoch: int, requester: int, app_id: AppId,
                          row: "metrics_mod.EpochMetrics") -> RetrievalTrace:
        sc = self.scenario
        rid = self.retrieval_count
        self.retrieval_count += 1
        rng = derive_rng(self.seed, "retrieval", rid)
        trace = RetrievalTrace(retrieval=rid, epoch=epoch, requester=requester,
                               app_label=app_id.label())
        self.traces.append(trace)
        row.retrievals += 1

        self.rounds[requester] = self.rounds.get(requester, 0) + 1
        call, replies, polled = broadcast_call_out(
            requester, app_id, self.rounds[requester], self.graph, self.installs,
            width_bits=self.width, hop_limit=sc.protocol.hop_limit,
            interceptor=self._interceptor)
        self._log(EV_CALL_OUT, {"requester": requester, "app": app_id.label(),
                                "round": self.rounds[requester]},
                  retrieval=rid, message=True, trace=trace)
        for reply in replies:
            self._log(EV_REPLY, {"responder": reply.responder,
                                 "digest": reply.digest.hex()},
                      bits=self.width, retrieval=rid, message=True, trace=trace)
        trace.responders = len(replies)

        responded = {r.responder for r in replies}
        ledger = self.ledgers[requester]
        for node in polled:
            update_response(ledger, node, node in responded)

        kept = filter_old_devices(replies, sc.protocol.min_key_bits)
        for reply in replies:
            if reply not in kept:
                self._log(EV_OLD_FILTERED, {"responder": reply.responder,
                                            "key_bits": reply.key_length_bits},
                          retrieval=rid, trace=trace)
                row.old_filtered += 1

        try:
            outcome = majority_vote(kept)
        except NoSourceError:
            row.vote_no_replies += 1
            trace.reason = "no-replies"
            self._fallback_to_store(trace, app_id, "no-replies")
            return trace
        except NoMajorityError:
            row.vote_ties += 1
            trace.reason = "vote-tie"
            self._fallback_to_store(trace, app_id, "vote-tie")
            return trace

        self._log(EV_VOTE, {"app": app_id.label(),
                            "majority": outcome.majority_digest.hex(),
                            "supporters": _ids_csv(outcome.supporters),
                            "dissenters": _ids_csv(outcome.dissenters),
                            "unanimous": outcome.unanimous},
                  retrieval=rid, trace=trace)
        if outcome.unanimous:
            row.vote_unanimous += 1
        else:
            row.vote_split += 1

        for responder in outcome.responders:
            update_correctness(ledger, responder,
                               responder in outcome.supporters,
                               responders=outcome.responders)

        for notice in notify_dissenters(outcome, requester):
            self._log(EV_NOTICE, {"target": notice.target,
                                  "suspected": notice.suspected_digest.hex(),
                                  "majority": notice.majority_digest.hex()},
                      retrieval=rid, message=True, trace=trace)
            row.notices += 1
            self.flagged.add((notice.target, app_id.label()))
            held = self.installs.get(notice.target, app_id)
            if held is not None and not held.is_tampered:
                row.false_accusations += 1

        source = choose_source(outcome, rng)
        self._log(EV_SOURCE, {"source": source}, retrieval=rid, trace=trace)

        package = self.installs.get(source, app_id)
        assert package is not None, "vote supporters always hold the app"
        try:
            auth = build_auth_package(source, package, self.graph,
                                      fanout=sc.protocol.mac_fanout, rng=rng,
                                      width_bits=self.width,
                                      min_key_bits=sc.protocol.min_key_bits)
        except NoVerifiersError:
            decision = AcceptanceDecision(False, REASON_NO_VERIFIERS, 0, 0)
            self._log(EV_DECISION, {"accepted": False, "reason": decision.reason,
                                    "positives": 0, "polled": 0},
                      retrieval=rid, trace=trace)
            trace.reason = decision.reason
            self._fallback_to_store(trace, app_id, decision.reason)
            return trace

        auth = self._interceptor(source, auth)
        delivered = package
        if sc.study.delivery_substitution:
            variant = tamper(AppPackage(app_id=app_id, payload=auth.payload,
                                        origin=package.origin, adversary=package.adversary),
                             adversary=source, rng=rng, width_bits=self.width)
            delivered = variant
            auth = type(auth)(sender=auth.sender, app_id=auth.app_id,
                              payload=variant.payload,
                              claimed_digest=variant.fingerprint(self.width),
                              macs=auth.macs)
        elif auth.payload == package.payload:
            delivered = package
        trace.mac_count = len(auth.macs)
        trace.payload_bytes = len(auth.payload)
        self._log(EV_DELIVERY, {"sender": auth.sender,
                                "claimed": auth.claimed_digest.hex(),
                                "macs": len(auth.macs),
                                "payload_bytes": len(auth.payload)},
                  bits=len(auth.macs) * self.width, retrieval=rid, message=True,
                  trace=trace)

        expected = outcome.majority_digest if sc.protocol.vote_binding else auth.claimed_digest
        if not toc_tou_check(auth, expected):
            decision = AcceptanceDecision(False, REASON_FINGERPRINT, 0, len(auth.macs))
            self._log(EV_DECISION, {"accepted": False, "reason": decision.reason,
                                    "positives": 0, "polled": len(auth.macs)},
                      retrieval=rid, trace=trace)
            trace.reason = decision.reason
            row.tocttou_rejections += 1
            self._fallback_to_store(trace, app_id, decision.reason)
            return trace

        compromise_p = sc.study.verifier_compromise_p
        if compromise_p is not None:
            lying = {v for v, _ in auth.macs if rng.random() < compromise_p}

            def verify_interceptor(node: int, message: object):
                if isinstance(message, VerifyReply) and node in lying:
                    return VerifyReply(verifier=node, verdict=True)
                return message
        else:
            verify_interceptor = self._interceptor

        requests, verdicts = verify_round(requester, auth, self.graph,
                                          interceptor=verify_interceptor,
                                          min_key_bits=sc.protocol.min_key_bits)
        replied = {v.verifier for v in verdicts}
        for request in requests:
            self._log(EV_VERIFY_REQ, {"verifier": request.verifier},
                      bits=self.width, retrieval=rid, message=True, trace=trace)
        for verdict in verdicts:
            self._log(EV_VERIFY_REPLY, {"verifier": verdict.verifier,
                                        "verdict": verdict.verdict},
                      bits=self.width, retrieval=rid, message=True, trace=trace)
        for verifier in auth.verifier_ids():
            if verifier != requester:
                update_response(ledger, verifier, verifier in replied)

        decision = decide(verdicts, total_polled=len(auth.macs),
                          quorum=sc.protocol.quorum)
        self._log(EV_DECISION, {"accepted": decision.accepted,
                                "reason": decision.reason,
                                "positives": decision.positives,
                                "polled": decision.total_polled},
                  retrieval=rid, trace=trace)
        trace.reason = decision.reason
        trace.accepted = decision.accepted

        if decision.accepted:
            assert delivered.payload == auth.payload
            self.installs.install(requester, delivered)
            trace.infected_install = delivered.is_tampered
            row.accepted += 1
            if delivered.is_tampered:
                row.tampered_accepted += 1
            self._log(EV_INSTALL, {"node": requester, "app": app_id.label(),
                                   "origin": delivered.origin,
                                   "digest": delivered.fingerprint(self.width).hex()},
                      retrieval=rid, trace=trace)
        else:
            self._fallback_to_store(trace, app_id, decision.reason)
        return trace

    # -- epochs ------------------------------------------------------------

    def _refresh_flagged(self) -> None:
        if self.scenario.store_blocked:
            return
        for node, label in sorted(self.flagged):
            if node not in self.graph.nodes:
                continue
            app_id = AppId.parse(label)
            if not self.catalog.has(app_id):
                continue
            clean = self.catalog.clean_package(app_id)
            self.installs.install(node, clean)
            self._log(EV_STORE_REFRESH, {"node": node, "app": label})
        self.flagged.clear()

    def _run_epoch(self, epoch: int) -> None:
        sc = self.scenario
        self._log(EV_EPOCH, {"epoch": epoch})
        row = metrics_mod.EpochMetrics(epoch=epoch)
        self.epoch_rows.append(row)

        for node in self.graph.node_ids():
            self.graph.nodes[node].age += 1

        self._refresh_flagged()

        summary = churn(self.graph, sc.formation, derive_rng(self.seed, "churn", epoch),
                        ledgers=self.ledgers, type_distribution=sc.type_distribution)
        for node in summary.left:
            self.installs.uninstall_node(node)
            self.ledgers.pop(node, None)
            self.rounds.pop(node, None)
            self.flagged = {(n, a) for n, a in self.flagged if n != node}
            self._log(EV_LEAVE, {"node": node})
        for node in summary.joined:
            self.ledgers[node] = Ledger(node, alpha=sc.trust.smoothing_alpha)
            self.rounds[node] = 0
            self.behaviors[node] = Behavior.HONEST
            self._log(EV_JOIN, {"node": node, "type": self.graph.nodes[node].node_type})
        for a, b in summary.severed:
            self._log(EV_SEVER, {"a": a, "b": b})
        row.joins = len(summary.joined)
        row.leaves = len(summary.left)
        row.severed = len(summary.severed)

        formed = propose_and_approve(self.graph, sc.formation, self.ledgers,
                                     derive_rng(self.seed, "formation", epoch))
        for a, b in formed:
            self._log(EV_LINK, {"a": a, "b": b})
        row.links_formed = len(formed)

        if sc.formation.supernode_count > 0:
            designate_supernodes(self.graph, sc.formation.supernode_count,
                                 sc.formation.supernode_multiplier)

        requests: list[tuple[int, AppId]] = []
        for entry in sc.workload.explicit:
            if entry["epoch"] == epoch and entry["requester"] in self.graph.nodes:
                requests.append((entry["requester"], AppId.parse(entry["app"])))
        if sc.workload.requests_per_epoch and self.catalog.app_ids() and len(self.graph):
            wl_rng = derive_rng(self.seed, "workload", epoch)
            labels = [a.label() for a in self.catalog.app_ids()]
            for _ in range(sc.workload.requests_per_epoch):
                requester = wl_rng.choice(self.graph.node_ids())
                label = wl_rng.choice(labels)
                requests.append((requester, AppId.parse(label)))
        for requester, app_id in requests:
            self.execute_retrieval(epoch, requester, app_id, row)

        row.nodes = len(self.graph)
        row.edges = self.graph.edge_count()
        row.infections = len(self.installs.infected_entries())
        try:
            row.homophily = homophily_index(self.graph)
        except UndefinedHomophilyError:
            row.homophily = None

        if sc.record_trust:
            for owner in self.graph.node_ids():
                ledger = self.ledgers[owner]
                for peer in ledger.known_peers():
                    rec = ledger.get_record(peer)
                    self.trust_samples.append(metrics_mod.TrustSample(
                        epoch=epoch, owner=owner, peer=peer,
                        resp_prob=rec.resp_prob, cond_trust=rec.cond_trust,
                        combined=combined_trust(ledger, peer)))

    def run(self) -> tuple[EventLog, "metrics_mod.MetricsReport"]:
        for epoch in range(self.scenario.epochs):
            self._run_epoch(epoch)
        report = metrics_mod.MetricsReport(
            parameters={"seed": self.seed, **self.scenario.to_dict()},
            assumptions=list(RUN_ASSUMPTIONS),
            epochs=self.epoch_rows,
            overhead=[metrics_mod.account_overhead(t) for t in self.traces],
            trust=self.trust_samples,
            log_digest=self.log.digest().hex())
        return self.log, report


def run(scenario: Scenario, seed: int | None = None) -> tuple[EventLog, "metrics_mod.MetricsReport"]:
    """Run a scenario to completion and return its log and metrics."""
    return Simulation(scenario, seed=seed).run()
