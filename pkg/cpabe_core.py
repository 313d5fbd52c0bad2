"""
Ciphertext-policy ABE (Bethencourt-Sahai-Waters) over the type-3 pairing backend.

    setup   -> pk = (h = g1^beta, e(g1, g2)^alpha),  mk = (beta, g2^alpha)
    keygen  -> D = g2^((alpha + r) / beta),  D_j = g2^r * H(j)^r_j,  D_j' = g1^r_j
    encrypt -> C~ = M * e(g1, g2)^(alpha s),  C = h^s,  C_y = g1^q_y(0),  C_y' = H(att(y))^q_y(0)
    decrypt -> A = e(g1, g2)^(r s) from the satisfied leaves,  M = C~ / (e(C, D) / A)

The per-key scalar r ties all attribute components of one key together, which
is what makes mixing components from different keys fail.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Tuple

import config
from access_policy import (
    AccessTree,
    AttributeSet,
    Selection,
    lagrange_coeff,
    min_satisfying_selection,
    satisfies,
    share_secret,
)
from errors import (
    AttributeMissing,
    EmptyAttributeSet,
    MalformedCiphertext,
    PolicyNotSatisfied,
)
from pairing_backend import (
    G1Element,
    G2Element,
    GroupContext,
    RandomSource,
    Scalar,
    TargetElement,
    hash_to_group,
    pair,
    random_nonzero_scalar,
    random_scalar,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PublicParams:
    ctx: GroupContext
    h: G1Element
    e_gg_alpha: TargetElement


@dataclass(frozen=True)
class MasterKey:
    beta: Scalar
    g_alpha: G2Element


@dataclass(frozen=True)
class AttributeComponent:
    d_j: G2Element
    d_j_prime: G1Element


@dataclass(frozen=True)
class PrivateKey:
    attrs: AttributeSet
    d: G2Element
    components: Mapping[str, AttributeComponent]


@dataclass(frozen=True)
class LeafComponent:
    c_y: G1Element
    c_y_prime: G2Element


@dataclass(frozen=True)
class AbeCiphertext:
    tree: AccessTree
    c_tilde: TargetElement
    c: G1Element
    components: Mapping[int, LeafComponent]


# ---------------------------------------------------------------------------
# test-only visibility into r and s

_debug_hook: Optional[Callable[[str, Scalar], None]] = None


def set_debug_hook(hook: Optional[Callable[[str, Scalar], None]]):
    """Register a callback receiving ("r", r) from keygen and ("s", s) from encrypt.

    Refused unless CPABE_DEBUG_HOOKS is enabled.
    """
    global _debug_hook
    if hook is not None and not config.DEBUG_HOOKS:
        raise RuntimeError("debug hooks are disabled (set CPABE_DEBUG_HOOKS=1)")
    _debug_hook = hook


def _trace(name: str, value: Scalar):
    if _debug_hook is not None and config.DEBUG_HOOKS:
        _debug_hook(name, value)


# ---------------------------------------------------------------------------
# the four algorithms

def setup(ctx: GroupContext, rng: Optional[RandomSource] = None) -> Tuple[PublicParams, MasterKey]:
    alpha = random_scalar(ctx, rng)
    beta = random_nonzero_scalar(ctx, rng)
    pk = PublicParams(ctx=ctx, h=ctx.g1 ** beta, e_gg_alpha=ctx.gt ** alpha)
    mk = MasterKey(beta=beta, g_alpha=ctx.g2 ** alpha)
    return pk, mk


def keygen(
    mk: MasterKey, pk: PublicParams, attrs, rng: Optional[RandomSource] = None
) -> PrivateKey:
    attrs = AttributeSet(attrs)
    if not attrs:
        raise EmptyAttributeSet("a private key needs at least one attribute")
    ctx = pk.ctx
    r = random_scalar(ctx, rng)
    _trace("r", r)
    g2_r = ctx.g2 ** r
    d = (mk.g_alpha * g2_r) ** mk.beta.inverse()
    components = {}
    for attribute in attrs.sorted():
        r_j = random_scalar(ctx, rng)
        components[attribute] = AttributeComponent(
            d_j=g2_r * hash_to_group(ctx, attribute) ** r_j,
            d_j_prime=ctx.g1 ** r_j,
        )
    logger.debug("issued key components for %d attributes", len(components))
    return PrivateKey(attrs=attrs, d=d, components=components)


def encrypt(
    pk: PublicParams, tree: AccessTree, m: TargetElement, rng: Optional[RandomSource] = None
) -> AbeCiphertext:
    ctx = pk.ctx
    s = random_scalar(ctx, rng)
    _trace("s", s)
    shares = share_secret(tree, s, ctx, rng)
    components = {}
    for leaf_id in tree.leaves():
        share = shares[leaf_id]
        components[leaf_id] = LeafComponent(
            c_y=ctx.g1 ** share,
            c_y_prime=hash_to_group(ctx, tree.node(leaf_id).attribute) ** share,
        )
    return AbeCiphertext(
        tree=tree,
        c_tilde=m * pk.e_gg_alpha ** s,
        c=pk.h ** s,
        components=components,
    )


def decrypt_node(ct: AbeCiphertext, sk: PrivateKey, node_id: int, selection: Selection) -> TargetElement:
    """e(g1, g2)^(r q_x(0)) for a node on the chosen frontier."""
    node = ct.tree.node(node_id)
    if node.is_leaf:
        component = sk.components.get(node.attribute)
        if component is None:
            raise AttributeMissing(f"key holds no component for attribute {node.attribute!r}")
        leaf = ct.components[node_id]
        return pair(leaf.c_y, component.d_j) / pair(component.d_j_prime, leaf.c_y_prime)

    chosen = selection.chosen[node_id]
    indices = [ct.tree.node(child).index for child in chosen]
    result = TargetElement.identity()
    for child in chosen:
        f_z = decrypt_node(ct, sk, child, selection)
        result = result * f_z ** lagrange_coeff(ct.tree.node(child).index, indices)
    return result


def _check_shape(ct: AbeCiphertext):
    if set(ct.components) != set(ct.tree.leaves()):
        raise MalformedCiphertext("leaf components do not match the access tree")


def decrypt(pk: PublicParams, ct: AbeCiphertext, sk: PrivateKey) -> TargetElement:
    _check_shape(ct)
    if not satisfies(ct.tree, sk.attrs):
        raise PolicyNotSatisfied(f"attributes {sk.attrs.sorted()} do not satisfy {ct.tree.to_text()!r}")
    selection = min_satisfying_selection(ct.tree, sk.attrs)
    a = decrypt_node(ct, sk, ct.tree.root, selection)
    return ct.c_tilde / (pair(ct.c, sk.d) / a)
