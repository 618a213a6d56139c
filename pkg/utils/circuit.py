"""酉量子电路：JSON模型、嵌入、编码为证明、从证明抽取，以及独立的态矢量模拟器"""
import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.config import DEFAULT_ATOM, MAX_QUBITS
from utils.errors import CircuitFormatError, DimensionError, QmllError
from utils.formula import Atom, Context
from utils.matrix import StateVector, UnitaryMatrix, identity, parse_complex
from utils.proof import Axiom, Cut, Proof, QRule
from utils.proof_text import read_gate
from utils.qiam import semantics_relative
from utils.scanner import Scanner

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------- JSON模型

class GateSpec(BaseModel):
    """一个门：gate为名字或门表达式，matrix为 [re,im] 元素的方阵，二者取一"""
    model_config = ConfigDict(extra="forbid")

    gate: Optional[str] = None
    matrix: Optional[List[List[Union[List[float], float]]]] = None
    targets: List[int] = Field(min_length=1)

    @model_validator(mode="after")
    def _check(self):
        if (self.gate is None) == (self.matrix is None):
            raise ValueError("gate 和 matrix 必须恰好给出一个")
        if any(t < 1 for t in self.targets):
            raise ValueError(f"目标比特从1开始编号：{self.targets}")
        if any(a >= b for a, b in zip(self.targets, self.targets[1:])):
            raise ValueError(f"目标比特必须严格递增：{self.targets}")
        return self


class CircuitModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    qubits: int = Field(ge=0)
    gates: List[GateSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_targets(self):
        for k, g in enumerate(self.gates):
            if g.targets[-1] > self.qubits:
                raise ValueError(f"第 {k + 1} 个门的目标 {g.targets} 超出 {self.qubits} 个量子比特")
        return self


# ---------------------------------------------------------------- 领域类型

class CircuitGate(NamedTuple):
    unitary: UnitaryMatrix
    targets: Tuple[int, ...]


class EmbeddedGate(NamedTuple):
    """作用在第 offset+1 .. offset+k 个量子比特上的门"""
    unitary: UnitaryMatrix
    offset: int

    @property
    def span(self) -> range:
        return range(self.offset, self.offset + self.unitary.dim_qubits)


@dataclass
class Circuit:
    n_qubits: int
    gates: List[CircuitGate] = field(default_factory=list)

    def __post_init__(self):
        for k, (u, targets) in enumerate(self.gates):
            _check_targets(targets, self.n_qubits)
            if u.dim_qubits != len(targets):
                raise CircuitFormatError(f"第 {k + 1} 个门作用于 {u.dim_qubits} 个量子比特，但给出了 {len(targets)} 个目标")


def _check_targets(targets: Sequence[int], m: int) -> None:
    if not targets or any(t < 1 or t > m for t in targets) or list(targets) != sorted(set(targets)):
        raise CircuitFormatError(f"无效的目标比特 {list(targets)}（共 {m} 个量子比特）")


def _gate_from_spec(spec: GateSpec) -> UnitaryMatrix:
    if spec.gate is not None:
        scanner = Scanner(spec.gate)
        gate = read_gate(scanner)
        scanner.expect_end()
        return gate
    u = UnitaryMatrix([[parse_complex(x) for x in row] for row in spec.matrix])
    if u.dim_qubits == 0:
        raise CircuitFormatError("矩阵门至少要作用于一个量子比特")
    return u


def parse_circuit(text: str) -> Circuit:
    """解析电路JSON；模型校验失败或门无效时抛出CircuitFormatError"""
    try:
        model = CircuitModel.model_validate_json(text)
    except ValidationError as e:
        raise CircuitFormatError(f"电路JSON无效：{e.errors()[0]['msg']}")
    gates = []
    for k, spec in enumerate(model.gates):
        try:
            gates.append(CircuitGate(_gate_from_spec(spec), tuple(spec.targets)))
        except QmllError as e:
            raise CircuitFormatError(f"第 {k + 1} 个门无效：{e}")
    return Circuit(model.qubits, gates)


def _is_expression(label: str) -> bool:
    return not label.startswith("(mat")


def to_model(c: Circuit) -> CircuitModel:
    specs = []
    for u, targets in c.gates:
        if _is_expression(u.label):
            specs.append(GateSpec(gate=u.label, targets=list(targets)))
        else:
            rows = [[[float(z.real), float(z.imag)] for z in row] for row in u.matrix]
            specs.append(GateSpec(matrix=rows, targets=list(targets)))
    return CircuitModel(qubits=c.n_qubits, gates=specs)


def print_circuit(c: Circuit) -> str:
    return to_model(c).model_dump_json(indent=2, exclude_none=True)


# ---------------------------------------------------------------- 嵌入

def _permute_axes(m: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """把作用在虚拟顺序比特上的矩阵改写到物理顺序：order[v]是虚拟比特v的物理位置"""
    b = len(order)
    inverse = [0] * b
    for v, p in enumerate(order):
        inverse[p] = v
    t = m.reshape((2,) * (2 * b))
    t = np.transpose(t, inverse + [b + v for v in inverse])
    return t.reshape(2 ** b, 2 ** b)


def embed_gate(u: UnitaryMatrix, targets: Sequence[int], m: int) -> EmbeddedGate:
    """目标连续时原样放在 min−1 处，否则在最小覆盖块上做比特置换共轭"""
    _check_targets(targets, m)
    if u.dim_qubits != len(targets):
        raise DimensionError(f"{u.dim_qubits} 比特的门不能作用于目标 {list(targets)}")
    lo, hi = targets[0], targets[-1]
    if hi - lo + 1 == len(targets):
        return EmbeddedGate(u, lo - 1)
    block = hi - lo + 1
    relative = [t - lo for t in targets]
    order = relative + [q for q in range(block) if q not in relative]
    padded = np.kron(u.matrix, np.eye(2 ** (block - len(targets))))
    return EmbeddedGate(UnitaryMatrix(_permute_axes(padded, order)), lo - 1)


# ---------------------------------------------------------------- 编码

def _layers(c: Circuit) -> List[List[EmbeddedGate]]:
    """贪心分层：与当前层重叠的门开启新的一层"""
    layers: List[List[EmbeddedGate]] = []
    used: set = set()
    for u, targets in c.gates:
        g = embed_gate(u, targets, c.n_qubits)
        if not layers or used.intersection(g.span):
            layers.append([])
            used = set()
        layers[-1].append(g)
        used.update(g.span)
    return layers


def _tower(layer: Sequence[EmbeddedGate], m: int, atom: Atom) -> Proof:
    """一层门：按偏移从内向外叠量子规则，空隙用恒等补齐"""
    node: Proof = Axiom(atom)
    filled = 0
    for g in sorted(layer, key=lambda g: g.offset):
        if g.offset > filled:
            node = QRule(g.offset - filled, identity(g.offset - filled), node)
        node = QRule(g.unitary.dim_qubits, g.unitary, node)
        filled = g.offset + g.unitary.dim_qubits
    if m > filled:
        node = QRule(m - filled, identity(m - filled), node)
    return node


def _join(towers: Sequence[Proof]) -> Proof:
    """相邻的层用切连接成平衡的切树，前一半在左"""
    if len(towers) == 1:
        return towers[0]
    mid = (len(towers) + 1) // 2
    return Cut(1, 0, _join(towers[:mid]), _join(towers[mid:]))


def encode(c: Circuit, atom: str = DEFAULT_ATOM) -> Proof:
    """电路编码为结论为 ⊢ ♦ᵐα⊥, □ᵐα 的证明，各层之间用切连接，切树深度随层数对数增长"""
    a = Atom(atom)
    layers = _layers(c)
    if not layers:
        return _tower([], c.n_qubits, a)
    proof = _join([_tower(layer, c.n_qubits, a) for layer in layers])
    logger.debug("编码 %d 个门为 %d 层", len(c.gates), len(layers))
    return proof


# ---------------------------------------------------------------- 抽取

def extract(p: Proof, entry: int, context: Context, prune_identity: bool = False) -> Circuit:
    """按机器的门序列给出连续目标的电路"""
    result = semantics_relative(p, entry, context)
    gates = []
    for event in result.events:
        u = event.effective
        if prune_identity and u.is_identity:
            continue
        gates.append(CircuitGate(u, tuple(range(event.offset + 1, event.offset + u.dim_qubits + 1))))
    return Circuit(result.unitary.dim_qubits, gates)


# ---------------------------------------------------------------- 模拟

def _apply_gate(state: np.ndarray, u: UnitaryMatrix, targets: Sequence[int], m: int) -> np.ndarray:
    """state形状为 (2,)*m + (B,)；在目标轴上收缩门矩阵"""
    k = len(targets)
    axes = [t - 1 for t in targets]
    gate = u.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(gate, state, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _run(c: Circuit, columns: np.ndarray) -> np.ndarray:
    m = c.n_qubits
    batch = columns.shape[1]
    state = columns.reshape((2,) * m + (batch,))
    for u, targets in c.gates:
        state = _apply_gate(state, u, targets, m)
    return state.reshape(2 ** m, batch)


def simulate(c: Circuit, register: StateVector) -> StateVector:
    """按列表顺序作用各门，不经过证明或机器"""
    if register.n_qubits != c.n_qubits:
        raise DimensionError(f"寄存器有 {register.n_qubits} 个量子比特，电路需要 {c.n_qubits} 个")
    out = _run(c, register.amplitudes.reshape(-1, 1))
    return StateVector(out[:, 0], check_norm=False)


def circuit_unitary(c: Circuit) -> np.ndarray:
    """逐个基矢模拟得到电路的酉矩阵"""
    if c.n_qubits > MAX_QUBITS:
        raise DimensionError(f"电路有 {c.n_qubits} 个量子比特，超过上限 {MAX_QUBITS}")
    return _run(c, np.eye(2 ** c.n_qubits, dtype=complex))


__all__ = [
    "Circuit", "CircuitGate", "EmbeddedGate", "CircuitModel", "GateSpec",
    "parse_circuit", "print_circuit", "to_model", "embed_gate", "encode", "extract",
    "simulate", "circuit_unitary",
]
