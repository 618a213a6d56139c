"""证明的S表达式读写

    P    ::= (ax F) | (cut i j P P) | (par i j P) | (tensor i j P P) | (q n GATE P) | (ex p1 ... pk P)
    GATE ::= NAME | (mat ROW ...) | (kron GATE GATE) | (dot GATE GATE)

位置从1开始；; 之后到行尾为注释。
"""
import logging
from typing import List

from utils.errors import ProofCheckError
from utils.formula import print_formula, read_formula
from utils.matrix import UnitaryMatrix, matmul, named_gate, parse_row, tensor
from utils.proof import Axiom, Cut, Exchange, ParRule, Proof, QRule, TensorRule, check, premises
from utils.scanner import Scanner

logger = logging.getLogger(__name__)

# 单行输出超过该宽度时换行缩进
LINE_WIDTH = 80
# 缩进上限，更深的前提与上限对齐
MAX_INDENT = 40


def read_gate(scanner: Scanner) -> UnitaryMatrix:
    if not scanner.accept("("):
        return named_gate(scanner.read_ident())
    head = scanner.read_ident()
    if head == "mat":
        rows: List[list] = []
        while scanner.peek() == "[":
            rows.append(parse_row(scanner.read_balanced("[", "]")))
        if len(rows) < 2 or any(len(row) != len(rows) for row in rows):
            scanner.fail("矩阵字面量必须是至少作用于一个量子比特的方阵")
        scanner.expect(")")
        return UnitaryMatrix(rows)
    if head in ("kron", "dot"):
        a = read_gate(scanner)
        b = read_gate(scanner)
        scanner.expect(")")
        return tensor(a, b) if head == "kron" else matmul(a, b)
    scanner.fail(f"未知的门表达式 {head!r}")


def read_proof(scanner: Scanner) -> Proof:
    scanner.expect("(")
    head = scanner.read_ident()
    if head == "ax":
        node = Axiom(read_formula(scanner))
    elif head in ("cut", "tensor"):
        i, j = scanner.read_int() - 1, scanner.read_int() - 1
        left = read_proof(scanner)
        right = read_proof(scanner)
        node = Cut(i, j, left, right) if head == "cut" else TensorRule(i, j, left, right)
    elif head == "par":
        i, j = scanner.read_int() - 1, scanner.read_int() - 1
        node = ParRule(i, j, read_proof(scanner))
    elif head == "q":
        n = scanner.read_int()
        gate = read_gate(scanner)
        node = QRule(n, gate, read_proof(scanner))
    elif head == "ex":
        perm = []
        while scanner.peek() not in ("(", None):
            perm.append(scanner.read_int() - 1)
        node = Exchange(tuple(perm), read_proof(scanner))
    else:
        scanner.fail(f"未知的规则 {head!r}")
    scanner.expect(")")
    return node


def parse_proof(text: str, validate: bool = True) -> Proof:
    """解析证明文本；validate为真时运行检查并拒绝不良构的证明"""
    scanner = Scanner(text)
    p = read_proof(scanner)
    scanner.expect_end()
    if validate:
        report = check(p)
        if not report.ok:
            raise ProofCheckError(report)
    return p


def _head(p: Proof) -> str:
    if isinstance(p, Axiom):
        return f"ax {print_formula(p.formula)}"
    if isinstance(p, (Cut, TensorRule, ParRule)):
        name = {Cut: "cut", TensorRule: "tensor", ParRule: "par"}[type(p)]
        return f"{name} {p.i + 1} {p.j + 1}"
    if isinstance(p, QRule):
        return f"q {p.n} {p.gate.label}"
    return "ex " + " ".join(str(k + 1) for k in p.perm)


def _inline(p: Proof) -> str:
    parts = [_head(p)] + [_inline(q) for q in premises(p)]
    return "(" + " ".join(parts) + ")"


def print_proof(p: Proof, indent: int = 0) -> str:
    """规范文本：放得下就写成一行，否则每个前提另起一行缩进两格，缩进不超过MAX_INDENT"""
    flat = _inline(p)
    if indent + len(flat) <= LINE_WIDTH or isinstance(p, Axiom):
        return flat
    inner = min(indent + 2, MAX_INDENT)
    lines = ["(" + _head(p)]
    for q in premises(p):
        lines.append(" " * inner + print_proof(q, inner))
    return "\n".join(lines) + ")"
