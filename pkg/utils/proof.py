"""QMLL证明树：规则结点、结论、出现标识、良构性检查与MLL公理连接矩阵

位置参数在内部从0开始，在文件格式中从1开始。
结点路径是子结点下标的元组：Cut/Tensor的左右前提分别为0和1，单前提规则为0。
"""
import logging
from dataclasses import dataclass, replace
from typing import Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple, Union

import numpy as np
from jinja2 import Template
from pydantic import BaseModel

from utils.errors import PreconditionError
from utils.formula import (Atom, Diamond, Box, Formula, Par, Tensor, dual, is_modal,
                           print_formula, wrap)
from utils.matrix import UnitaryMatrix, approx_equal

logger = logging.getLogger(__name__)

Sequent = Tuple[Formula, ...]
Path = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Axiom:
    formula: Formula


@dataclass(frozen=True, eq=False)
class Cut:
    i: int
    j: int
    left: "Proof"
    right: "Proof"


@dataclass(frozen=True, eq=False)
class ParRule:
    i: int
    j: int
    sub: "Proof"


@dataclass(frozen=True, eq=False)
class TensorRule:
    i: int
    j: int
    left: "Proof"
    right: "Proof"


@dataclass(frozen=True, eq=False)
class QRule:
    n: int
    gate: UnitaryMatrix
    sub: "Proof"


@dataclass(frozen=True, eq=False)
class Exchange:
    """结构规则：结论第t个公式是前提第perm[t]个公式"""
    perm: Tuple[int, ...]
    sub: "Proof"


Proof = Union[Axiom, Cut, ParRule, TensorRule, QRule, Exchange]


class OccurrenceId(NamedTuple):
    """公式出现：结点路径 + 该结点结论中的位置"""
    path: Path
    position: int

    def __str__(self):
        return f"{format_path(self.path)}@{self.position + 1}"


def format_path(path: Sequence[int]) -> str:
    return ".".join(str(k) for k in path) if path else "ε"


def premises(p: Proof) -> List[Proof]:
    if isinstance(p, Axiom):
        return []
    if isinstance(p, (Cut, TensorRule)):
        return [p.left, p.right]
    return [p.sub]


def with_premises(p: Proof, subs: Sequence[Proof]) -> Proof:
    if isinstance(p, (Cut, TensorRule)):
        return replace(p, left=subs[0], right=subs[1])
    if isinstance(p, Axiom):
        return p
    return replace(p, sub=subs[0])


# ---------------------------------------------------------------- 结论

class RuleViolation(Exception):
    """单个规则实例不满足规则模式"""


def _without(seq: Sequence[Formula], *positions: int) -> List[Formula]:
    return [f for k, f in enumerate(seq) if k not in positions]


def _check_position(seq: Sequence[Formula], k: int, what: str) -> None:
    if not 0 <= k < len(seq):
        raise RuleViolation(f"{what}位置 {k + 1} 越界（前提共有 {len(seq)} 个公式）")


def rule_conclusion(p: Proof, subs: Sequence[Sequent]) -> Sequent:
    """由前提结论按规则模式计算本结点结论，不满足时抛出RuleViolation"""
    if isinstance(p, Axiom):
        return (dual(p.formula), p.formula)
    if isinstance(p, Cut):
        left, right = subs
        _check_position(left, p.i, "左切")
        _check_position(right, p.j, "右切")
        if left[p.i] != dual(right[p.j]):
            raise RuleViolation(
                f"切公式不对偶：{print_formula(left[p.i])} 与 {print_formula(right[p.j])}")
        return tuple(_without(left, p.i) + _without(right, p.j))
    if isinstance(p, ParRule):
        (sub,) = subs
        _check_position(sub, p.i, "⅋左")
        _check_position(sub, p.j, "⅋右")
        if p.i == p.j:
            raise RuleViolation("⅋规则的两个位置必须不同")
        return tuple(_without(sub, p.i, p.j) + [Par(sub[p.i], sub[p.j])])
    if isinstance(p, TensorRule):
        left, right = subs
        _check_position(left, p.i, "⊗左")
        _check_position(right, p.j, "⊗右")
        return tuple(_without(left, p.i) + _without(right, p.j) + [Tensor(left[p.i], right[p.j])])
    if isinstance(p, QRule):
        (sub,) = subs
        if len(sub) != 2:
            raise RuleViolation(f"量子规则的前提必须恰有两个公式，实际有 {len(sub)} 个")
        if p.n < 1:
            raise RuleViolation(f"量子规则的元数必须至少为1，实际为 {p.n}")
        if p.gate.dim_qubits != p.n:
            raise RuleViolation(
                f"维度不匹配：门 {p.gate.label} 作用于 {p.gate.dim_qubits} 个量子比特，规则声明 n={p.n}")
        if is_modal(sub[0]) != is_modal(sub[1]):
            raise RuleViolation(
                f"模态不一致：前提 {print_formula(sub[0])} 与 {print_formula(sub[1])} 必须同为模态或同为非模态")
        return (wrap(Diamond, sub[0], p.n), wrap(Box, sub[1], p.n))
    if isinstance(p, Exchange):
        (sub,) = subs
        if sorted(p.perm) != list(range(len(sub))):
            raise RuleViolation(f"交换规则的排列 {[k + 1 for k in p.perm]} 无效（前提共有 {len(sub)} 个公式）")
        return tuple(sub[k] for k in p.perm)
    raise RuleViolation(f"未知的规则结点 {type(p).__name__}")


def conclusion(p: Proof) -> Sequent:
    """结点的结论（缓存于结点上）；证明不良构时抛出PreconditionError"""
    cached = p.__dict__.get("_sequent")
    if cached is not None:
        return cached
    try:
        sequent = rule_conclusion(p, [conclusion(q) for q in premises(p)])
    except RuleViolation as e:
        raise PreconditionError(f"{type(p).__name__} 结点不良构：{e}")
    object.__setattr__(p, "_sequent", sequent)
    return sequent


def print_sequent(seq: Sequence[Formula]) -> str:
    return "⊢ " + ", ".join(print_formula(f) for f in seq)


def linkage(p: Proof) -> List[Optional[Tuple[int, int]]]:
    """结论每个位置对应的前提出现 (前提下标, 位置)；主公式为None"""
    subs = [conclusion(q) for q in premises(p)]
    if isinstance(p, (Axiom, QRule)):
        return [None, None]
    if isinstance(p, Exchange):
        return [(0, k) for k in p.perm]
    if isinstance(p, ParRule):
        return [(0, k) for k in range(len(subs[0])) if k not in (p.i, p.j)] + [None]
    links = ([(0, k) for k in range(len(subs[0])) if k != p.i]
             + [(1, k) for k in range(len(subs[1])) if k != p.j])
    if isinstance(p, TensorRule):
        links.append(None)
    return links


def reverse_linkage(p: Proof) -> dict:
    """(前提下标, 位置) -> 结论位置，只含非主公式"""
    return {link: t for t, link in enumerate(linkage(p)) if link is not None}


# ---------------------------------------------------------------- 遍历

def iter_nodes(p: Proof, path: Path = ()) -> Iterator[Tuple[Path, Proof]]:
    """前序遍历，左前提先于右前提"""
    yield path, p
    for k, q in enumerate(premises(p)):
        yield from iter_nodes(q, path + (k,))


def subproof_at(p: Proof, path: Sequence[int]) -> Proof:
    node = p
    for k in path:
        subs = premises(node)
        if not 0 <= k < len(subs):
            raise PreconditionError(f"无效的结点路径 {format_path(path)}")
        node = subs[k]
    return node


def replace_at(p: Proof, path: Sequence[int], new: Proof) -> Proof:
    if not path:
        return new
    subs = premises(p)
    k = path[0]
    if not 0 <= k < len(subs):
        raise PreconditionError(f"无效的结点路径 {format_path(path)}")
    subs = list(subs)
    subs[k] = replace_at(subs[k], path[1:], new)
    return with_premises(p, subs)


def rule_count(p: Proof) -> int:
    """规则实例数，交换规则不计入"""
    return sum(1 for _, q in iter_nodes(p) if not isinstance(q, Exchange))


def has_cut(p: Proof) -> bool:
    return any(isinstance(q, Cut) for _, q in iter_nodes(p))


def principal_formulas(p: Proof, path: Sequence[int]) -> Set[OccurrenceId]:
    """该结点的规则引入（或切掉）的公式出现"""
    node = subproof_at(p, path)
    path = tuple(path)
    if isinstance(node, Cut):
        return {OccurrenceId(path + (0,), node.i), OccurrenceId(path + (1,), node.j)}
    return {OccurrenceId(path, t) for t, link in enumerate(linkage(node)) if link is None}


def proofs_equal(p: Proof, q: Proof, tol: float = 0.0) -> bool:
    """结构相等；门矩阵按tol逐项比较"""
    if type(p) is not type(q):
        return False
    if isinstance(p, Axiom):
        return p.formula == q.formula
    if isinstance(p, (Cut, ParRule, TensorRule)) and (p.i, p.j) != (q.i, q.j):
        return False
    if isinstance(p, Exchange) and p.perm != q.perm:
        return False
    if isinstance(p, QRule):
        if p.n != q.n or p.gate.dim_qubits != q.gate.dim_qubits:
            return False
        if not approx_equal(p.gate, q.gate, tol):
            return False
    return all(proofs_equal(a, b, tol) for a, b in zip(premises(p), premises(q)))


# ---------------------------------------------------------------- 检查

_REPORT_TEMPLATE = Template(
    "{% if ok %}ok: {{ conclusion }} ({{ rules }} 条规则){% else %}"
    "error at node {{ path }}: {{ message }}{% endif %}")


class CheckReport(BaseModel):
    ok: bool
    path: Optional[str] = None
    message: Optional[str] = None
    conclusion: Optional[str] = None
    rules: int = 0

    def __str__(self):
        return _REPORT_TEMPLATE.render(**self.model_dump())


def check(p: Proof) -> CheckReport:
    """逐结点验证规则模式，返回第一个（后序最先遇到的）违例或成功"""
    failure: List[Tuple[Path, str]] = []

    def visit(node: Proof, path: Path) -> Optional[Sequent]:
        subs = []
        for k, q in enumerate(premises(node)):
            seq = visit(q, path + (k,))
            if seq is None:
                return None
            subs.append(seq)
        try:
            sequent = rule_conclusion(node, subs)
        except RuleViolation as e:
            failure.append((path, str(e)))
            return None
        object.__setattr__(node, "_sequent", sequent)
        return sequent

    result = visit(p, ())
    if result is None:
        path, message = failure[0]
        logger.info("检查失败：结点 %s：%s", format_path(path), message)
        return CheckReport(ok=False, path=format_path(path), message=message)
    return CheckReport(ok=True, conclusion=print_sequent(result), rules=rule_count(p))


# ---------------------------------------------------------------- 公理连接矩阵

def mll_axiom_link_matrix(p: Proof) -> np.ndarray:
    """无切、无量子规则、公理均为原子的证明的公理连接置换矩阵

    结论中的原子出现按从左到右排序，矩阵第x行第y列为1当且仅当两者由同一公理连接。
    """
    partner = {}
    counter = [0]

    def origins(node: Proof) -> List[List[int]]:
        if isinstance(node, Cut):
            raise PreconditionError("证明含有切规则")
        if isinstance(node, QRule):
            raise PreconditionError("证明含有量子规则")
        if isinstance(node, Axiom):
            if not isinstance(node.formula, Atom):
                raise PreconditionError(f"公理 {print_formula(node.formula)} 不是原子公理")
            a, b = counter[0], counter[0] + 1
            counter[0] += 2
            partner[a], partner[b] = b, a
            return [[a], [b]]
        if isinstance(node, Exchange):
            sub = origins(node.sub)
            return [sub[k] for k in node.perm]
        if isinstance(node, ParRule):
            sub = origins(node.sub)
            return _without(sub, node.i, node.j) + [sub[node.i] + sub[node.j]]
        left, right = origins(node.left), origins(node.right)
        return _without(left, node.i) + _without(right, node.j) + [left[node.i] + right[node.j]]

    conclusion(p)
    leaves = [leaf for block in origins(p) for leaf in block]
    index = {leaf: x for x, leaf in enumerate(leaves)}
    matrix = np.zeros((len(leaves), len(leaves)), dtype=complex)
    for x, leaf in enumerate(leaves):
        matrix[x, index[partner[leaf]]] = 1
    return matrix
