"""Block-sparsity certificates over every node of a realized offspring tree."""
from ..samplers.blocks import block_collision
from .report import ExperimentReport


def sparsity_certificate(assignment, kinds, name="sparsity_certificate"):
    """Check every node's offspring set against the partitions declared for its level.

    `kinds` maps a level n to a list of (label, BlockPartition); a callable or a
    dict both work.  The first failing node is reported with its colliding pair.
    """
    children = getattr(assignment, "assignment", assignment).children
    lookup = kinds if callable(kinds) else (lambda n: kinds.get(n, ()))
    rep = ExperimentReport(name)
    rep.tolerance("exact", 0)
    checked = {}
    first = None
    for word in sorted(children, key=lambda w: (len(w), w)):
        n = len(word) + 1
        kids = children[word]
        for label, kind in lookup(n):
            checked[label] = checked.get(label, 0) + 1
            if first is None and len(kids) > 1:
                clash = block_collision(list(kids), kind)
                if clash is not None:
                    first = (n, word, label, clash)
    for label, count in sorted(checked.items()):
        rep.scalar(f"nodes_checked[{label}]", count)
    detail = "" if first is None else f"level {first[0]} node {first[1]} {first[2]}: {first[3]}"
    rep.verdict("block_sparse", first is None, "exact", detail)
    if first is not None:
        rep.scalar("counterexample", {"level": first[0], "node": [list(u) for u in first[1]],
                                      "partition": first[2], "pair": [list(p) for p in first[3]]})
    return rep
