"""切消：约简点检测、各约简模式、交换规则整理与规范化

规范化只触发“最内层”约简点：结点本身有约简而其真后代都没有。
这样的结点两两不相交，每个结点按固定优先级只取一个约简，
因此任何策略（最左、随机）都得到同一个范式。
random-any 在全部约简点中随机选择，范式在整理交换规则后同样唯一。
"""
import logging
import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Sequence, Tuple

from jinja2 import Template

from config.config import DEFAULT_SEED, DEFAULT_STRATEGY
from utils.errors import BoundExceededError, PreconditionError, StaleRedexError
from utils.formula import Box, dual, leading_run, modal_prefix_length, print_formula, size
from utils.matrix import identity, matmul, tensor
from utils.proof import (Axiom, Cut, Exchange, ParRule, Path, Proof, QRule, TensorRule,
                         conclusion, format_path, iter_nodes, linkage, premises, proofs_equal,
                         replace_at, rule_count, subproof_at)

logger = logging.getLogger(__name__)

SWAP = (1, 0)
# 引入连接词的规则
INTRODUCING = (ParRule, TensorRule, QRule)


class RedexKind(str, Enum):
    AXIOM = "AxiomRed"
    MULT_PRINCIPAL = "MultPrincipal"
    QUANTUM_PRINCIPAL = "QuantumPrincipal"
    ETA = "EtaExpand"
    Q_CONTRACT = "QContract"
    COMMUTE_PAR = "CommutePar"
    COMMUTE_TENSOR_LEFT = "CommuteTensorLeft"
    COMMUTE_TENSOR_RIGHT = "CommuteTensorRight"


@dataclass(frozen=True)
class Redex:
    """约简点：种类、结点路径以及触发所需的参数"""
    kind: RedexKind
    path: Path
    params: Tuple = ()

    def __str__(self):
        extra = " " + " ".join(str(x) for x in self.params) if self.params else ""
        return f"{self.kind.value} @ {format_path(self.path)}{extra}"


@dataclass
class TraceStep:
    redex: Redex
    size_before: int
    weight_before: int
    weight_after: int


@dataclass
class ReductionTrace:
    steps: List[TraceStep]
    final: Proof
    initial_weight: int = 0
    strategy: str = DEFAULT_STRATEGY

    @property
    def is_monotone(self) -> bool:
        return all(s.weight_after < s.weight_before for s in self.steps)


_TRACE_LINE = Template(
    "{{ index }} {{ step.redex.kind.value }} {{ path }} {{ step.weight_before }} -> {{ step.weight_after }}")


def trace_lines(trace: ReductionTrace) -> List[str]:
    """--trace 的输出：序号、约简种类、结点路径、约简前后权重"""
    return [_TRACE_LINE.render(index=k + 1, step=s, path=format_path(s.redex.path))
            for k, s in enumerate(trace.steps)]


# ---------------------------------------------------------------- 交换规则

def _ex(perm: Sequence[int], sub: Proof) -> Proof:
    perm = tuple(perm)
    if perm == tuple(range(len(perm))):
        return sub
    return Exchange(perm, sub)


def _orient(core: Proof, q: Tuple[int, ...]) -> Tuple[Proof, Tuple[int, ...]]:
    """⅋、⊗、切之下的公理取规范朝向：公式的文本不大于其对偶的文本"""
    if isinstance(core, Axiom):
        flipped = dual(core.formula)
        if print_formula(flipped) < print_formula(core.formula):
            return Axiom(flipped), tuple(1 - x for x in q)
    return core, q


def _settle(node: Proof) -> Tuple[Proof, Tuple[int, ...]]:
    """返回 (core, q)，使 node 等价于 Exchange(q, core)，且core内部已整理"""
    if isinstance(node, Axiom):
        return node, (0, 1)
    if isinstance(node, Exchange):
        core, q = _settle(node.sub)
        perm = tuple(q[k] for k in node.perm)
        if isinstance(core, Axiom) and perm == SWAP:
            return Axiom(dual(core.formula)), (0, 1)
        return core, perm
    if isinstance(node, QRule):
        core, q = _settle(node.sub)
        return QRule(node.n, node.gate, _ex(q, core)), (0, 1)
    settled = [_orient(*_settle(q)) for q in premises(node)]
    maps = [q for _, q in settled]
    if isinstance(node, ParRule):
        q = maps[0]
        new = ParRule(q[node.i], q[node.j], settled[0][0])
    else:
        new = type(node)(maps[0][node.i], maps[1][node.j], settled[0][0], settled[1][0])
    old_keys = [("P",) if link is None else (link[0], maps[link[0]][link[1]]) for link in linkage(node)]
    new_keys = [("P",) if link is None else link for link in linkage(new)]
    return new, tuple(new_keys.index(key) for key in old_keys)


def settle_exchanges(p: Proof) -> Proof:
    """把交换规则推向根部：合并、去掉平凡交换、吸收进公理，只留在根部或量子规则正上方"""
    core, q = _settle(p)
    return _ex(q, core)


# ---------------------------------------------------------------- 权重

def _measure(node: Proof) -> int:
    if isinstance(node, Axiom):
        return 2 * modal_prefix_length(node.formula) + 1
    if isinstance(node, Exchange):
        return 0
    return 1


def weight(p: Proof) -> int:
    """Σ结点测度 + Σ切 2^|切公式| · 切子树的测度和"""
    cuts = []

    def visit(node: Proof) -> int:
        s = _measure(node) + sum(visit(q) for q in premises(node))
        if isinstance(node, Cut):
            cuts.append(2 ** size(conclusion(node.left)[node.i]) * s)
        return s

    return visit(p) + sum(cuts)


# ---------------------------------------------------------------- 约简点

def _is_principal(node: Proof, position: int) -> bool:
    return linkage(node)[position] is None


def _redexes_at(node: Proof, path: Path) -> List[Redex]:
    """该结点上的全部约简，按优先级排列"""
    if isinstance(node, Axiom):
        kind, n, _ = leading_run(node.formula)
        if kind is None:
            return []
        return [Redex(RedexKind.ETA, path, ("box" if kind is Box else "diamond", n))]
    if isinstance(node, QRule):
        if isinstance(node.sub, QRule):
            return [Redex(RedexKind.Q_CONTRACT, path, (node.sub.n, node.n))]
        return []
    if not isinstance(node, Cut):
        return []
    found = []
    left, right = node.left, node.right
    if isinstance(right, Axiom):
        found.append(Redex(RedexKind.AXIOM, path, ("right",)))
    if isinstance(left, Axiom):
        found.append(Redex(RedexKind.AXIOM, path, ("left",)))
    left_principal = isinstance(left, INTRODUCING) and _is_principal(left, node.i)
    right_principal = isinstance(right, INTRODUCING) and _is_principal(right, node.j)
    if left_principal and right_principal:
        if isinstance(left, TensorRule) and isinstance(right, ParRule):
            found.append(Redex(RedexKind.MULT_PRINCIPAL, path, ("tensor-left",)))
        elif isinstance(left, ParRule) and isinstance(right, TensorRule):
            found.append(Redex(RedexKind.MULT_PRINCIPAL, path, ("par-left",)))
        elif isinstance(left, QRule) and isinstance(right, QRule) and left.n == right.n:
            found.append(Redex(RedexKind.QUANTUM_PRINCIPAL, path, (left.n,)))
    for side, premise, position in (("right", right, node.j), ("left", left, node.i)):
        if isinstance(premise, (ParRule, TensorRule)) and not _is_principal(premise, position):
            found.append(Redex(_commute_kind(premise, position), path, (side,)))
    return found


def _commute_kind(premise: Proof, position: int) -> RedexKind:
    if isinstance(premise, ParRule):
        return RedexKind.COMMUTE_PAR
    e, _ = linkage(premise)[position]
    return RedexKind.COMMUTE_TENSOR_LEFT if e == 0 else RedexKind.COMMUTE_TENSOR_RIGHT


def find_redexes(p: Proof) -> List[Redex]:
    """完整枚举：每个结点上每个模式的每个实例（前序）"""
    found = []
    for path, node in iter_nodes(p):
        found.extend(_redexes_at(node, path))
    return found


def admissible_redexes(p: Proof) -> List[Redex]:
    """最内层约简点，每个结点取优先级最高的一个，从左到右排列"""
    found = []

    def visit(node: Proof, path: Path) -> bool:
        below = False
        for k, q in enumerate(premises(node)):
            below = visit(q, path + (k,)) or below
        here = _redexes_at(node, path)
        if here and not below:
            found.append(here[0])
        return below or bool(here)

    visit(p, ())
    return found


def is_normal(p: Proof) -> bool:
    return not find_redexes(p)


# ---------------------------------------------------------------- 约简模式

def _shift(a: int, k: int, offset: int = 0) -> int:
    return offset + (a if a < k else a - 1)


def _axiom_reduction(cut: Cut, side: str) -> Proof:
    if side == "right":
        n = len(conclusion(cut.left))
        return _ex([k for k in range(n) if k != cut.i] + [cut.i], cut.left)
    n = len(conclusion(cut.right))
    return _ex([cut.j] + [k for k in range(n) if k != cut.j], cut.right)


def _mult_principal(cut: Cut, orientation: str) -> Proof:
    if orientation == "tensor-left":
        t, s = cut.left, cut.right
        t2_len = len(conclusion(t.right))
        pos_a = _shift(s.i, s.j, t2_len - 1)
        return Cut(t.i, pos_a, t.left, Cut(t.j, s.j, t.right, s.sub))
    s, t = cut.left, cut.right
    pos_b = _shift(s.j, s.i)
    return Cut(pos_b, t.j, Cut(s.i, t.i, s.sub, t.left), t.right)


def _quantum_principal(cut: Cut) -> Proof:
    u, v = cut.left, cut.right
    if cut.i == 1:
        # 存活的♦来自左前提，先作用U
        return QRule(u.n, matmul(v.gate, u.gate), Cut(1, 0, u.sub, v.sub))
    return Exchange(SWAP, QRule(u.n, matmul(u.gate, v.gate), Cut(1, 0, v.sub, u.sub)))


def _eta_expand(ax: Axiom) -> Proof:
    kind, n, body = leading_run(ax.formula)
    if kind is Box:
        return QRule(n, identity(n), Axiom(body))
    return Exchange(SWAP, QRule(n, identity(n), Axiom(dual(body))))


def _q_contract(outer: QRule) -> Proof:
    inner = outer.sub
    return QRule(inner.n + outer.n, tensor(inner.gate, outer.gate), inner.sub)


def _commute(cut: Cut, side: str) -> Proof:
    """把切提升到⅋/⊗之上；side指出被提升穿过的前提"""
    if side == "right":
        other, y, pos_other, pos_y = cut.left, cut.right, cut.i, cut.j
    else:
        y, other, pos_y, pos_other = cut.left, cut.right, cut.i, cut.j
    e, k = linkage(y)[pos_y]
    ys = premises(y)
    if side == "right":
        inner = Cut(pos_other, k, other, ys[e])
        offset, other_index = len(conclusion(other)) - 1, 0
    else:
        inner = Cut(k, pos_other, ys[e], other)
        offset, other_index = 0, 1
    if isinstance(y, ParRule):
        new_y = ParRule(_shift(y.i, k, offset), _shift(y.j, k, offset), inner)
    elif e == 0:
        new_y = TensorRule(_shift(y.i, k, offset), y.j, inner, ys[1])
    else:
        new_y = TensorRule(y.i, _shift(y.j, k, offset), ys[0], inner)

    y_links = linkage(y)
    y_is_left = side == "left"
    old_keys = []
    for premise_index, position in linkage(cut):
        if (premise_index == 0) == y_is_left:
            link = y_links[position]
            old_keys.append(("P",) if link is None else ("Y",) + link)
        else:
            old_keys.append(("O", position))
    inner_links = linkage(inner)
    new_keys = []
    for link in linkage(new_y):
        if link is None:
            new_keys.append(("P",))
        elif link[0] == e:
            origin, position = inner_links[link[1]]
            new_keys.append(("O", position) if origin == other_index else ("Y", e, position))
        else:
            new_keys.append(("Y",) + link)
    return _ex([new_keys.index(key) for key in old_keys], new_y)


def _fire(node: Proof, r: Redex) -> Proof:
    if r.kind is RedexKind.AXIOM:
        return _axiom_reduction(node, r.params[0])
    if r.kind is RedexKind.MULT_PRINCIPAL:
        return _mult_principal(node, r.params[0])
    if r.kind is RedexKind.QUANTUM_PRINCIPAL:
        return _quantum_principal(node)
    if r.kind is RedexKind.ETA:
        return _eta_expand(node)
    if r.kind is RedexKind.Q_CONTRACT:
        return _q_contract(node)
    return _commute(node, r.params[0])


def step(p: Proof, r: Redex) -> Proof:
    """在p上触发约简r，并整理交换规则；结论序列保持不变"""
    try:
        node = subproof_at(p, r.path)
    except PreconditionError:
        raise StaleRedexError(f"约简点 {r} 的路径已不存在")
    if r not in _redexes_at(node, r.path):
        raise StaleRedexError(f"约简点 {r} 与当前证明不匹配")
    result = settle_exchanges(replace_at(p, r.path, _fire(node, r)))
    logger.debug("触发 %s", r)
    return result


# ---------------------------------------------------------------- 规范化

def step_bound(p: Proof) -> int:
    return max(2 ** rule_count(p), weight(p))


def normalize(p: Proof, strategy: str = DEFAULT_STRATEGY, seed: int = DEFAULT_SEED) -> ReductionTrace:
    """反复触发约简直到范式

    leftmost-innermost与random只在最内层约简点中选择；random-any在全部约简点中随机选择。
    """
    candidates = find_redexes if strategy == "random-any" else admissible_redexes
    if strategy == "leftmost-innermost":
        choose: Callable[[List[Redex]], Redex] = lambda redexes: redexes[0]
    elif strategy in ("random", "random-any"):
        rng = random.Random(seed)
        choose = rng.choice
    else:
        raise PreconditionError(f"未知的策略 {strategy!r}")

    current = settle_exchanges(p)
    bound = step_bound(current)
    trace = ReductionTrace(steps=[], final=current, initial_weight=weight(current), strategy=strategy)
    w = trace.initial_weight
    while True:
        redexes = candidates(current)
        if not redexes:
            break
        if len(trace.steps) >= bound:
            raise BoundExceededError(f"规范化超过 {bound} 步仍未结束")
        r = choose(redexes)
        size_before = rule_count(current)
        current = step(current, r)
        w_after = weight(current)
        if w_after >= w:
            logger.warning("权重未严格下降：%s 处 %d -> %d", r, w, w_after)
        trace.steps.append(TraceStep(r, size_before, w, w_after))
        w = w_after
    trace.final = current
    logger.info("规范化完成：%d 步，策略 %s", len(trace.steps), strategy)
    return trace


def one_step_reducts(p: Proof, admissible_only: bool = True) -> List[Proof]:
    redexes = admissible_redexes(p) if admissible_only else find_redexes(p)
    return [step(p, r) for r in redexes]


def rejoin_within(p: Proof, q: Proof, steps: int, tol: float = 0.0) -> bool:
    """p与q各自至多走steps步（最内层约简）后能否到达同一证明"""

    def reachable(start: Proof) -> List[Proof]:
        frontier, seen = [start], [start]
        for _ in range(steps):
            frontier = [r for f in frontier for r in one_step_reducts(f)]
            seen.extend(frontier)
        return seen

    left, right = reachable(p), reachable(q)
    return any(proofs_equal(a, b, tol) for a in left for b in right)
