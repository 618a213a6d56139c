"""稠密复矩阵运算：门、寄存器、张量积、伴随与局部作用

约定：张量积的第一个因子作用在编号较小的量子比特上，即基矢下标的高位；
量子比特1是最高位。
"""
import json
import logging
import re
from typing import List, Optional, Sequence

import numpy as np

from config.config import MATRIX_DIGITS, MAX_QUBITS, UNITARY_TOLERANCE
from utils.errors import DimensionError, QmllSyntaxError

logger = logging.getLogger(__name__)

_SQRT2_INV = 1 / np.sqrt(2)

# 命名门库
GATE_LIBRARY = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
SELF_ADJOINT = {"H", "X", "Y", "Z", "CNOT", "SWAP"}
_IDENTITY_NAME = re.compile(r"^I([1-9]\d*)?$")


def _qubits_of(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise DimensionError(f"矩阵维度 {dim} 不是2的幂")
    return n


def unitarity_defect(m: np.ndarray) -> float:
    """‖M†M − I‖_F"""
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0]), "fro"))


class UnitaryMatrix:
    """n个量子比特上的酉矩阵，构造时检查酉性，之后只读"""

    def __init__(self, matrix, label: Optional[str] = None, tolerance: float = UNITARY_TOLERANCE):
        arr = np.array(matrix, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"门矩阵必须是方阵，实际形状为 {arr.shape}")
        self.dim_qubits = _qubits_of(arr.shape[0])
        defect = unitarity_defect(arr)
        if defect > tolerance:
            raise DimensionError(f"矩阵不是酉矩阵：‖M†M − I‖_F = {defect:.3g}")
        arr.setflags(write=False)
        self.matrix = arr
        self._label = label

    @property
    def label(self) -> str:
        """门的文本表示：名字、(kron A B)、(dot A B) 或 (mat ...)"""
        if self._label is None:
            self._label = mat_literal(self.matrix)
        return self._label

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(self.matrix.shape[0])))

    def __repr__(self):
        return f"UnitaryMatrix({self.label}, qubits={self.dim_qubits})"


def identity(n: int) -> UnitaryMatrix:
    return UnitaryMatrix(np.eye(2 ** n, dtype=complex), f"I{n}")


def named_gate(name: str) -> UnitaryMatrix:
    """按名字取门，I{n}表示n比特恒等，I等同I1"""
    found = _IDENTITY_NAME.match(name)
    if found:
        return identity(int(found.group(1) or "1"))
    if name not in GATE_LIBRARY:
        raise QmllSyntaxError(f"未知的门 {name!r}")
    return UnitaryMatrix(GATE_LIBRARY[name], name)


def matmul(a: UnitaryMatrix, b: UnitaryMatrix) -> UnitaryMatrix:
    """矩阵乘积 a·b（先作用b）；与恒等相乘时直接返回另一个因子"""
    if a.matrix.shape[1] != b.matrix.shape[0]:
        raise DimensionError(f"矩阵乘积维度不匹配：{a.matrix.shape} · {b.matrix.shape}")
    if a.is_identity:
        return b
    if b.is_identity:
        return a
    return UnitaryMatrix(a.matrix @ b.matrix, f"(dot {a.label} {b.label})")


def tensor(a: UnitaryMatrix, b: UnitaryMatrix) -> UnitaryMatrix:
    """Kronecker积，a占据编号较小的量子比特"""
    if a.is_identity and b.is_identity:
        return identity(a.dim_qubits + b.dim_qubits)
    return UnitaryMatrix(np.kron(a.matrix, b.matrix), f"(kron {a.label} {b.label})")


def adjoint(u: UnitaryMatrix) -> UnitaryMatrix:
    label = u.label if (u.is_identity or u.label in SELF_ADJOINT) else None
    return UnitaryMatrix(u.matrix.conj().T, label)


def approx_equal(a, b, tol: float) -> bool:
    """逐项模差的最大值不超过tol"""
    a = a.matrix if isinstance(a, UnitaryMatrix) else np.asarray(a)
    b = b.matrix if isinstance(b, UnitaryMatrix) else np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"形状不一致：{a.shape} 与 {b.shape}")
    if a.size == 0:
        return True
    return bool(np.max(np.abs(a - b)) <= tol)


def embed(u: UnitaryMatrix, offset: int, n_qubits: int) -> np.ndarray:
    """显式构造 I_offset ⊗ U ⊗ I_rest（只用于小规模校验）"""
    rest = n_qubits - offset - u.dim_qubits
    if offset < 0 or rest < 0:
        raise DimensionError(f"偏移 {offset} 处放不下 {u.dim_qubits} 比特的门（共 {n_qubits} 比特）")
    return np.kron(np.kron(np.eye(2 ** offset), u.matrix), np.eye(2 ** rest))


# ---------------------------------------------------------------- 寄存器

class StateVector:
    """n个量子比特的振幅向量"""

    def __init__(self, amplitudes, check_norm: bool = True):
        arr = np.array(amplitudes, dtype=complex).reshape(-1)
        self.n_qubits = _qubits_of(arr.shape[0])
        if self.n_qubits > MAX_QUBITS:
            raise DimensionError(f"寄存器有 {self.n_qubits} 个量子比特，超过上限 {MAX_QUBITS}")
        if check_norm and abs(np.linalg.norm(arr) - 1) > UNITARY_TOLERANCE:
            raise DimensionError(f"寄存器未归一化：‖v‖ = {np.linalg.norm(arr):.12g}")
        arr.setflags(write=False)
        self.amplitudes = arr

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        """由比特串构造基矢，如 '010'，第一个字符是量子比特1"""
        if any(b not in "01" for b in bits):
            raise QmllSyntaxError(f"基矢标签只能包含0和1：{bits!r}")
        arr = np.zeros(2 ** len(bits), dtype=complex)
        arr[int(bits, 2) if bits else 0] = 1
        return cls(arr)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        return cls.basis("0" * n_qubits)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self):
        return f"StateVector(qubits={self.n_qubits})"


def apply_at(u: UnitaryMatrix, register, offset: int):
    """对寄存器施加 I_offset ⊗ U ⊗ I_rest，不构造完整矩阵

    register可以是StateVector，也可以是形状为 (2^N,) 或 (2^N, B) 的数组；
    后者按列批量作用，用于符号地组合门序列。
    """
    is_state = isinstance(register, StateVector)
    data = register.amplitudes if is_state else np.asarray(register, dtype=complex)
    total = _qubits_of(data.shape[0])
    k = u.dim_qubits
    rest = total - offset - k
    if offset < 0 or rest < 0:
        raise DimensionError(f"偏移 {offset} 处放不下 {k} 比特的门（寄存器共 {total} 比特）")
    batch = data.shape[1] if data.ndim == 2 else 1
    view = data.reshape(2 ** offset, 2 ** k, 2 ** rest * batch)
    out = np.einsum("ij,ajb->aib", u.matrix, view).reshape(data.shape)
    if is_state:
        return StateVector(out, check_norm=False)
    return out


# ---------------------------------------------------------------- 文本

def format_number(x: float) -> str:
    text = format(float(x), f".{MATRIX_DIGITS}g")
    return "0" if text == "-0" else text


def _entry_json(z: complex) -> str:
    return f"[{format_number(z.real)},{format_number(z.imag)}]"


def row_json(row: Sequence[complex]) -> str:
    return "[" + ",".join(_entry_json(z) for z in row) + "]"


def matrix_json(m) -> str:
    """矩阵的JSON文本：行优先，元素为 [re,im]"""
    m = m.matrix if isinstance(m, UnitaryMatrix) else np.asarray(m)
    return "[" + ",".join(row_json(row) for row in m) + "]"


def state_json(v) -> str:
    v = v.amplitudes if isinstance(v, StateVector) else np.asarray(v)
    return row_json(v)


def mat_literal(m: np.ndarray) -> str:
    return "(mat " + " ".join(row_json(row) for row in m) + ")"


def parse_complex(value) -> complex:
    """[re,im] 对或实数"""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        return complex(value[0], value[1])
    raise QmllSyntaxError(f"复数应写成 [re,im] 或实数，实际为 {value!r}")


def parse_row(text: str) -> List[complex]:
    try:
        entries = json.loads(text)
    except json.JSONDecodeError as e:
        raise QmllSyntaxError(f"矩阵行不是合法JSON：{e.msg}", e.pos)
    if not isinstance(entries, list):
        raise QmllSyntaxError("矩阵行必须是数组")
    return [parse_complex(x) for x in entries]


def parse_state(text: str, n_qubits: Optional[int] = None) -> StateVector:
    """解析寄存器文本：JSON振幅数组，或 |0101⟩ / |0101> 形式的基矢"""
    text = text.strip()
    if text.startswith("|"):
        found = re.match(r"^\|([01]*)(⟩|>)$", text)
        if not found:
            raise QmllSyntaxError(f"无法解析基矢标签 {text!r}")
        state = StateVector.basis(found.group(1))
    else:
        try:
            values = json.loads(text)
        except json.JSONDecodeError as e:
            raise QmllSyntaxError(f"寄存器不是合法JSON：{e.msg}", e.pos)
        if not isinstance(values, list):
            raise QmllSyntaxError("寄存器JSON必须是数组")
        try:
            state = StateVector([parse_complex(x) for x in values])
        except DimensionError as e:
            raise QmllSyntaxError(str(e))
    if n_qubits is not None and state.n_qubits != n_qubits:
        raise DimensionError(f"寄存器应有 {n_qubits} 个量子比特，实际为 {state.n_qubits}")
    return state


__all__ = [
    "UnitaryMatrix", "StateVector", "GATE_LIBRARY",
    "identity", "named_gate", "matmul", "tensor", "adjoint", "approx_equal", "apply_at", "embed",
    "matrix_json", "state_json", "parse_state", "parse_row", "format_number", "unitarity_defect",
]
