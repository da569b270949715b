"""Executable property checks: convergence and anchor stability.

These are the heavy randomized suites the scenario runner can embed as
assertions. Each returns a machine-readable report dict with ok/detail.
"""

from __future__ import annotations

import random
import time

from ..crdt import SequenceCrdt
from ..document import ReplicatedDocument
from .oracles import ShadowText


def _random_edit(replica: SequenceCrdt, rng: random.Random):
    n = len(replica)
    if n > 0 and rng.random() < 0.3:
        off = rng.randrange(n)
        return replica.local_delete(off, min(n - off, rng.randint(1, 3)))
    text = "".join(rng.choice("abcdefgh ") for _ in range(rng.randint(1, 4)))
    return replica.local_insert(rng.randint(0, n), text)


def convergence_report(
    replicas: int = 5,
    edits_per_replica: int = 200,
    permutations: int = 20,
    seed: int = 0,
    base_text: str = "shared base text",
) -> dict:
    """Replicas edit blindly; every delivery permutation must converge to
    one identical body."""
    started = time.monotonic()
    rng = random.Random(seed)
    base_src = SequenceCrdt("base")
    base_ops = base_src.local_insert(0, base_text) if base_text else []

    sources = []
    for i in range(replicas):
        r = SequenceCrdt(f"r{i}")
        r.integrate_all(list(base_ops))
        sources.append(r)
    batches = []
    for r in sources:
        for _ in range(edits_per_replica):
            batches.append((r.replica_id, _random_edit(r, rng)))

    reference: str | None = None
    for p in range(permutations):
        perm_rng = random.Random(seed * 7919 + p)
        order = list(batches)
        perm_rng.shuffle(order)
        fresh = []
        for i in range(replicas):
            r = SequenceCrdt(f"p{p}_{i}")
            r.integrate_all(list(base_ops))
            fresh.append(r)
        for r in fresh:
            member_order = list(order)
            perm_rng.shuffle(member_order)
            for origin, ops in member_order:
                r.integrate_all(list(ops))
        texts = {r.text for r in fresh}
        pending = any(r.has_pending for r in fresh)
        if len(texts) != 1 or pending:
            return {
                "ok": False,
                "detail": f"permutation {p} diverged: {len(texts)} distinct bodies, pending={pending}",
            }
        body = texts.pop()
        if reference is None:
            reference = body
        elif body != reference:
            return {"ok": False, "detail": f"permutation {p} converged to a different body"}
    return {
        "ok": True,
        "detail": (
            f"{replicas} replicas x {edits_per_replica} edits, {permutations} permutations, "
            f"{len(batches)} batches, {time.monotonic() - started:.2f}s"
        ),
        "elapsed_s": time.monotonic() - started,
        "final_length": len(reference or ""),
    }


def anchor_report(scripts: int = 1000, seed: int = 0) -> dict:
    """Randomized edit scripts around an anchored span; the resolved span
    must match the hand-tracked oracle every time, and fully deleted spans
    must resolve empty."""
    started = time.monotonic()
    rng = random.Random(seed)
    checks = 0
    deleted_spans = 0
    for script in range(scripts):
        base = "".join(rng.choice("abcdefgh _") for _ in range(rng.randint(5, 40)))
        doc = ReplicatedDocument("d", replica_id="edit")
        shadow = ShadowText()
        ops = doc.body.local_insert(0, base)
        shadow.insert(0, [(op.id, op.char) for op in ops])
        start = rng.randrange(len(base))
        end = rng.randint(start + 1, len(base))
        anchor = doc.anchor_for_range(start, end)
        for _ in range(8):
            n = len(doc.text)
            if n > 0 and rng.random() < 0.35:
                off = rng.randrange(n)
                length = min(n - off, rng.randint(1, 4))
                doc.body.local_delete(off, length)
                shadow.delete(off, length)
            else:
                text = "".join(rng.choice("abcdefgh _") for _ in range(rng.randint(1, 5)))
                off = rng.randint(0, n)
                wire = doc.body.local_insert(off, text)
                shadow.insert(off, [(op.id, op.char) for op in wire])
            got = doc.resolve_anchor(anchor)
            expected = shadow.resolve(anchor.start, anchor.end)
            got_text = doc.anchor_text(anchor)
            expected_text = shadow.span_text(anchor.start, anchor.end)
            checks += 1
            if got != expected or got_text != expected_text:
                return {
                    "ok": False,
                    "detail": f"script {script}: resolved {got} {got_text!r}, oracle {expected} {expected_text!r}",
                }
            if got_text == "" and got[0] != got[1]:
                return {"ok": False, "detail": f"script {script}: deleted span resolved non-empty range {got}"}
            if got_text == "":
                deleted_spans += 1
    return {
        "ok": True,
        "detail": f"{scripts} scripts, {checks} checks, {deleted_spans} empty-span resolutions, "
                  f"{time.monotonic() - started:.2f}s",
        "elapsed_s": time.monotonic() - started,
    }
