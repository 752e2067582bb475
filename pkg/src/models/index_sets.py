"""
Support sets, closest common ancestors and branching links of a constrained tree
"""
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Tuple
import numpy as np
from src.models.kinematic_tree import WORLD, ConstraintSet, KinematicTree
from src.utils.errors import NotAncestor


@dataclass(frozen=True)
class IndexSets:
    """
    Index sets over the extended node range 0..n_b+m_b.

    Nodes 1..n_b are physical links and n_b+1.. are end-effectors; node 0 is
    the world. ``anc_branch`` is -1 at the world, ``desc_branch`` is defined
    only for nodes with a nonempty support set and for the world.
    """
    n_b: int
    effectors: Tuple[int, ...]
    parent: Tuple[int, ...]
    children: Tuple[Tuple[int, ...], ...]
    depth: Tuple[int, ...]
    es: Tuple[FrozenSet[int], ...]
    cca: Dict[Tuple[int, int], int]
    branching: Tuple[int, ...]
    anc_branch: Tuple[int, ...]
    desc_branch: Dict[int, int]
    top: Dict[int, int]
    supporting: Tuple[int, ...]

    @property
    def m_b(self) -> int:
        return len(self.effectors)

    def is_branching(self, i: int) -> bool:
        return i in self._branching_set

    @property
    def _branching_set(self) -> FrozenSet[int]:
        return frozenset(self.branching)

    def is_effector(self, i: int) -> bool:
        return i > self.n_b

    def table(self) -> np.ndarray:
        """cca as an m_b×m_b integer array in end-effector order"""
        table = np.zeros((self.m_b, self.m_b), dtype=int)
        for a, e in enumerate(self.effectors):
            for b, f in enumerate(self.effectors):
                table[a, b] = self.cca[(e, f)]
        return table

    def path(self, j: int, i: int) -> List[int]:
        """Nodes strictly below j down to and including i, top first"""
        nodes = []
        k = i
        while k != j:
            if k <= WORLD:
                raise NotAncestor(f'{j} is not a proper ancestor of {i}')
            nodes.append(k)
            k = self.parent[k]
        if not nodes:
            raise NotAncestor(f'{j} is not a proper ancestor of {i}')
        return nodes[::-1]


def _chain_to_root(parent: Tuple[int, ...], i: int) -> List[int]:
    chain = [i]
    while chain[-1] != WORLD:
        chain.append(parent[chain[-1]])
    return chain


def compute_index_sets(tree: KinematicTree, cons: ConstraintSet) -> IndexSets:
    """
    Build ES, cca, the branching set and the closest branching ancestor and
    descendant of every node.

    Args:
        tree: Validated kinematic tree
        cons: End-effectors attached to the tree

    Returns:
        IndexSets over links and end-effectors
    """
    n_b = tree.n_b
    effectors = tuple(cons.indices)
    size = n_b + len(effectors) + 1

    parent = list(tree.parent) + [e.parent for e in cons.effectors]
    children: List[List[int]] = [list(c) for c in tree.children] + [[] for _ in effectors]
    for e in cons.effectors:
        children[e.parent].append(e.index)
    depth = [tree.depth(i) for i in range(n_b + 1)] + [tree.depth(e.parent) + 1 for e in cons.effectors]

    # Support sets, leaves first
    es: List[FrozenSet[int]] = [frozenset()] * size
    for e in effectors:
        es[e] = frozenset([e])
    for i in range(n_b, -1, -1):
        es[i] = frozenset().union(*(es[c] for c in children[i]))

    branching = {WORLD, *effectors}
    for i in range(1, n_b + 1):
        if es[i] and all(es[c] < es[i] for c in children[i]):
            branching.add(i)

    # Closest branching ancestor, root first
    anc_branch = [-1] * size
    for i in range(1, size):
        p = parent[i]
        anc_branch[i] = p if p in branching else anc_branch[p]

    # Closest branching descendant, leaves first
    desc_branch: Dict[int, int] = {}
    for i in list(effectors) + list(range(n_b, -1, -1)):
        if i in branching:
            desc_branch[i] = i
        elif es[i]:
            child = next(c for c in children[i] if es[c] == es[i])
            desc_branch[i] = desc_branch[child]

    top: Dict[int, int] = {}
    for i in sorted(branching):
        if i == WORLD:
            continue
        k = i
        while parent[k] != anc_branch[i]:
            k = parent[k]
        top[i] = k

    cca: Dict[Tuple[int, int], int] = {}
    for e in effectors:
        closure = set(_chain_to_root(tuple(parent), e))
        for f in effectors:
            cca[(e, f)] = next(k for k in _chain_to_root(tuple(parent), f) if k in closure)

    return IndexSets(
        n_b=n_b,
        effectors=effectors,
        parent=tuple(parent),
        children=tuple(tuple(c) for c in children),
        depth=tuple(depth),
        es=tuple(es),
        cca=cca,
        branching=tuple(sorted(branching)),
        anc_branch=tuple(anc_branch),
        desc_branch=desc_branch,
        top=top,
        supporting=tuple(i for i in range(1, n_b + 1) if es[i])
    )
