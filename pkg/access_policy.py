"""
Access trees for ciphertext policies.

Policy grammar (keywords case-insensitive, attributes case-sensitive):

    policy  := or_expr
    or_expr := and_expr ('or' and_expr)*
    and_expr:= atom ('and' atom)*
    atom    := ATTR | INT 'of' '(' policy (',' policy)+ ')' | '(' policy ')'

``and`` chains become one gate with k = number of children, ``or`` chains one
gate with k = 1, ``K of (...)`` a gate with k = K. Nodes are numbered in
pre-order and every child carries its 1-based position under its parent; that
position is the interpolation x-coordinate used when the secret is shared.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from errors import (
    DegenerateSet,
    NotSatisfied,
    PointNotInSet,
    PolicySyntaxError,
    ThresholdOutOfRange,
)
from pairing_backend import RESERVED_WORDS, GroupContext, RandomSource, Scalar, random_scalar, validate_attribute

KEYWORDS = RESERVED_WORDS
MAX_NESTING = 64


class NodeKind(Enum):
    LEAF = "leaf"
    GATE = "gate"


@dataclass(frozen=True)
class AccessNode:
    node_id: int
    kind: NodeKind
    threshold: int
    children: Tuple[int, ...] = ()
    attribute: Optional[str] = None
    index: int = 0  # 0 for the root

    @property
    def is_leaf(self) -> bool:
        return self.kind is NodeKind.LEAF


@dataclass(frozen=True)
class AccessTree:
    root: int
    nodes: Tuple[AccessNode, ...]

    def node(self, node_id: int) -> AccessNode:
        return self.nodes[node_id]

    def leaves(self) -> Tuple[int, ...]:
        """Leaf ids, left to right."""
        return tuple(n.node_id for n in self.nodes if n.is_leaf)

    def attributes(self) -> FrozenSet[str]:
        return frozenset(n.attribute for n in self.nodes if n.is_leaf)

    def to_text(self, node_id: Optional[int] = None) -> str:
        node = self.node(self.root if node_id is None else node_id)
        if node.is_leaf:
            return node.attribute
        children = [self.to_text(c) for c in node.children]
        if node.threshold == len(node.children) or node.threshold == 1:
            keyword = " and " if node.threshold == len(node.children) else " or "
            wrapped = [
                f"({text})" if not self.node(c).is_leaf else text
                for c, text in zip(node.children, children)
            ]
            return keyword.join(wrapped)
        return f"{node.threshold} of ({', '.join(children)})"

    def __str__(self):
        return self.to_text()


class AttributeSet(frozenset):
    """The attribute set of a key (S, D_i) or a query (gamma)."""

    def __new__(cls, attributes: Iterable[str] = ()):
        if isinstance(attributes, str):
            attributes = [attributes]
        return super().__new__(cls, (validate_attribute(a) for a in attributes))

    @classmethod
    def parse(cls, text: str) -> "AttributeSet":
        """Comma-separated list, as accepted by the CLI."""
        return cls(item.strip() for item in text.split(",") if item.strip())

    def sorted(self) -> List[str]:
        return sorted(self)

    def __repr__(self):
        return f"AttributeSet({self.sorted()})"


@dataclass(frozen=True)
class LeafShareMap:
    shares: Mapping[int, Scalar]

    def __getitem__(self, leaf_id: int) -> Scalar:
        return self.shares[leaf_id]

    def __len__(self):
        return len(self.shares)


@dataclass(frozen=True)
class Selection:
    """For each gate on the chosen frontier, the k_x satisfied children combined during decryption."""

    chosen: Mapping[int, Tuple[int, ...]]
    leaves: Tuple[int, ...]


# ---------------------------------------------------------------------------
# parsing

class _Token(NamedTuple):
    kind: str
    text: str
    position: int


_TOKEN_PATTERN = re.compile(
    r"\s*(?:(?P<int>\d+)(?![A-Za-z_])|(?P<word>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),]))"
)


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    position = 0
    while True:
        while position < len(text) and text[position].isspace():
            position += 1
        if position >= len(text):
            break
        match = _TOKEN_PATTERN.match(text, position)
        if match is None:
            raise PolicySyntaxError(position, f"unexpected character {text[position]!r}")
        start = match.start(match.lastgroup)
        if match.group("int") is not None:
            tokens.append(_Token("INT", match.group("int"), start))
        elif match.group("word") is not None:
            word = match.group("word")
            kind = word.upper() if word.lower() in KEYWORDS else "ATTR"
            tokens.append(_Token(kind, word, start))
        else:
            tokens.append(_Token(match.group("punct"), match.group("punct"), start))
        position = match.end()
    tokens.append(_Token("END", "", len(text)))
    return tokens


# Parse result before node numbering: an attribute string or (threshold, children)
_Expr = Union[str, Tuple[int, list]]


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.depth = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def accept(self, kind: str) -> Optional[_Token]:
        token = self.current
        if token.kind == kind:
            self.pos += 1
            return token
        return None

    def expect(self, kind: str, description: str) -> _Token:
        token = self.accept(kind)
        if token is None:
            found = self.current.text or "end of policy"
            raise PolicySyntaxError(self.current.position, f"expected {description}, found {found!r}")
        return token

    def parse(self) -> _Expr:
        expr = self.policy()
        self.expect("END", "end of policy")
        return expr

    def policy(self) -> _Expr:
        operands = [self.and_expr()]
        while self.accept("OR"):
            operands.append(self.and_expr())
        return operands[0] if len(operands) == 1 else (1, operands)

    def and_expr(self) -> _Expr:
        operands = [self.atom()]
        while self.accept("AND"):
            operands.append(self.atom())
        return operands[0] if len(operands) == 1 else (len(operands), operands)

    def open_group(self):
        token = self.expect("(", "'('")
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise PolicySyntaxError(token.position, f"policy nested too deeply (limit {MAX_NESTING})")

    def close_group(self):
        self.expect(")", "')'")
        self.depth -= 1

    def atom(self) -> _Expr:
        token = self.current
        if self.accept("ATTR"):
            return token.text
        if self.accept("INT"):
            self.expect("OF", "'of'")
            self.open_group()
            children = [self.policy()]
            self.expect(",", "','")
            children.append(self.policy())
            while self.accept(","):
                children.append(self.policy())
            self.close_group()
            threshold = int(token.text)
            if not 1 <= threshold <= len(children):
                raise ThresholdOutOfRange(
                    f"threshold {threshold} outside 1..{len(children)} at position {token.position}"
                )
            return threshold, children
        if self.current.kind == "(":
            self.open_group()
            inner = self.policy()
            self.close_group()
            return inner
        found = token.text or "end of policy"
        raise PolicySyntaxError(token.position, f"expected attribute, threshold or '(', found {found!r}")


def _build(expr: _Expr) -> AccessTree:
    nodes: List[AccessNode] = []

    def visit(item: _Expr, index: int) -> int:
        node_id = len(nodes)
        nodes.append(None)
        if isinstance(item, str):
            nodes[node_id] = AccessNode(node_id, NodeKind.LEAF, 1, (), item, index)
        else:
            threshold, children = item
            child_ids = tuple(visit(child, i) for i, child in enumerate(children, start=1))
            nodes[node_id] = AccessNode(node_id, NodeKind.GATE, threshold, child_ids, None, index)
        return node_id

    root = visit(expr, 0)
    return AccessTree(root=root, nodes=tuple(nodes))


def parse_policy(text: str) -> AccessTree:
    if not text or not text.strip():
        raise PolicySyntaxError(0, "empty policy")
    return _build(_Parser(text).parse())


def and_policy(attributes: Sequence[str]) -> AccessTree:
    """Flat AND-chain over the given attributes."""
    return parse_policy(" and ".join(attributes))


# ---------------------------------------------------------------------------
# satisfaction and secret sharing

def _satisfied_nodes(tree: AccessTree, attrs: FrozenSet[str]) -> Dict[int, bool]:
    result: Dict[int, bool] = {}
    for node in reversed(tree.nodes):  # children always follow their parent in pre-order
        if node.is_leaf:
            result[node.node_id] = node.attribute in attrs
        else:
            result[node.node_id] = sum(result[c] for c in node.children) >= node.threshold
    return result


def satisfies(tree: AccessTree, attrs: Iterable[str]) -> bool:
    return _satisfied_nodes(tree, frozenset(attrs))[tree.root]


def _evaluate(coefficients: Sequence[Scalar], x: int) -> Scalar:
    result = Scalar(0)
    for coefficient in reversed(coefficients):
        result = result * x + coefficient
    return result


def share_secret(
    tree: AccessTree, s: Scalar, ctx: GroupContext, rng: Optional[RandomSource] = None
) -> LeafShareMap:
    """Top-down: q_root(0) = s, q_child(0) = q_parent(index(child)), deg q_x = k_x - 1."""
    values: Dict[int, Scalar] = {tree.root: s}
    shares: Dict[int, Scalar] = {}
    for node in tree.nodes:
        value = values[node.node_id]
        if node.is_leaf:
            shares[node.node_id] = value
            continue
        coefficients = [value] + [random_scalar(ctx, rng) for _ in range(node.threshold - 1)]
        for child in node.children:
            values[child] = _evaluate(coefficients, tree.node(child).index)
    return LeafShareMap(shares)


def lagrange_coeff(i, point_set: Iterable) -> Scalar:
    """Delta_{i,S}(0) = prod_{j in S, j != i} (0 - j) / (i - j) mod p."""
    points = [Scalar.of(int(p)).value for p in point_set]
    i = Scalar.of(int(i)).value
    if len(set(points)) != len(points):
        raise DegenerateSet(f"duplicate interpolation points in {points}")
    if 0 in points:
        raise DegenerateSet("interpolation points must be nonzero")
    if i not in points:
        raise PointNotInSet(f"{i} is not in {points}")
    numerator = Scalar(1)
    denominator = Scalar(1)
    for j in points:
        if j != i:
            numerator = numerator * (-j)
            denominator = denominator * (i - j)
    return numerator / denominator


def min_satisfying_selection(tree: AccessTree, attrs: Iterable[str]) -> Selection:
    satisfied = _satisfied_nodes(tree, frozenset(attrs))
    if not satisfied[tree.root]:
        raise NotSatisfied("attribute set does not satisfy the access tree")
    chosen: Dict[int, Tuple[int, ...]] = {}
    leaves: List[int] = []
    pending = [tree.root]
    while pending:
        node = tree.node(pending.pop())
        if node.is_leaf:
            leaves.append(node.node_id)
            continue
        picked = tuple(c for c in node.children if satisfied[c])[:node.threshold]
        chosen[node.node_id] = picked
        pending.extend(reversed(picked))
    return Selection(chosen=chosen, leaves=tuple(leaves))
