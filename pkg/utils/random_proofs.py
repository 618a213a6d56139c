"""带种子的随机证明与随机电路生成器，用于性质测试的语料"""
import logging
import random
from typing import List, Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from utils.circuit import Circuit, CircuitGate, encode
from utils.formula import (Atom, Box, Diamond, Formula, Par, Tensor, contexts_for, depth, dual,
                           is_modal, leading_run, wrap)
from utils.matrix import UnitaryMatrix, identity, named_gate
from utils.proof import (Axiom, Cut, Exchange, ParRule, Proof, QRule, TensorRule, check,
                         conclusion, rule_count)

logger = logging.getLogger(__name__)

SWAP = (1, 0)


def register_size(p: Proof) -> int:
    """机器在该证明上可能用到的最大寄存器比特数"""
    return max(depth(c) for f in conclusion(p) for c, _ in contexts_for(f))


def random_unitary(n: int, rng: np.random.Generator) -> UnitaryMatrix:
    """n个量子比特上Haar分布的随机酉矩阵"""
    return UnitaryMatrix(unitary_group.rvs(2 ** n, random_state=rng))


class ProofGenerator:
    """生成良构的QMLL证明：原子/模态公理、⅋、⊗、量子规则，以及与恒等形证明之间的切"""

    def __init__(self, seed: int = 0, max_rules: int = 12, max_qubits: int = 3,
                 atoms: Sequence[str] = ("a", "b"), max_register: int = 6):
        self.random = random.Random(seed)
        self.rng = np.random.default_rng(seed)
        self.max_rules = max_rules
        self.max_qubits = max_qubits
        self.atoms = list(atoms)
        self.max_register = max_register

    # ------------------------------------------------------------ 公式与门

    def atom(self) -> Atom:
        return Atom(self.random.choice(self.atoms), self.random.random() < 0.5)

    def formula(self, depth: int = 2) -> Formula:
        if depth <= 0 or self.random.random() < 0.3:
            return self.atom()
        kind = self.random.choice([Par, Tensor, Box, Diamond])
        if kind in (Box, Diamond):
            return wrap(kind, self.formula(depth - 1), self.random.randint(1, self.max_qubits))
        return kind(self.formula(depth - 1), self.formula(depth - 1))

    def gate(self, n: int) -> UnitaryMatrix:
        roll = self.random.random()
        if roll < 0.2:
            return identity(n)
        if n == 1 and roll < 0.5:
            return named_gate(self.random.choice(["H", "X", "Y", "Z", "S", "T"]))
        if n == 2 and roll < 0.5:
            return named_gate(self.random.choice(["CNOT", "SWAP"]))
        return random_unitary(n, self.rng)

    # ------------------------------------------------------------ 恒等形证明

    def identity_proof(self, f: Formula) -> Proof:
        """结论为 ⊢ f⊥, f 的证明；模态前缀按不超过max_qubits的块展开为量子规则"""
        if isinstance(f, Atom) or self.random.random() < 0.3:
            return Axiom(f)
        if isinstance(f, Par):
            inner = TensorRule(0, 0, self.identity_proof(f.left), self.identity_proof(f.right))
            return ParRule(0, 1, inner)
        if isinstance(f, Tensor):
            inner = TensorRule(1, 1, self.identity_proof(f.left), self.identity_proof(f.right))
            return Exchange(SWAP, ParRule(0, 1, inner))
        kind, n, body = leading_run(f)
        chunk = self.random.randint(1, min(n, self.max_qubits))
        rest = wrap(kind, body, n - chunk)
        if kind is Box:
            return QRule(chunk, self.gate(chunk), self.identity_proof(rest))
        return Exchange(SWAP, QRule(chunk, self.gate(chunk), self.identity_proof(dual(rest))))

    # ------------------------------------------------------------ 证明

    def axiom(self) -> Proof:
        if self.random.random() < 0.7:
            return Axiom(self.atom())
        return Axiom(self.formula(1))

    def proof(self, depth: int = 3) -> Proof:
        if depth <= 0:
            return self.axiom()
        choice = self.random.choices(["ax", "par", "tensor", "q", "cut"], weights=[1, 2, 2, 2, 3])[0]
        if choice == "ax":
            return self.axiom()
        if choice == "par":
            sub = self.proof(depth - 1)
            size = len(conclusion(sub))
            if size < 2:
                return sub
            i, j = self.random.sample(range(size), 2)
            return ParRule(i, j, sub)
        if choice == "tensor":
            left, right = self.proof(depth - 1), self.proof(depth - 1)
            return TensorRule(self.random.randrange(len(conclusion(left))),
                              self.random.randrange(len(conclusion(right))), left, right)
        if choice == "q":
            sub = self.proof(depth - 1)
            seq = conclusion(sub)
            if len(seq) != 2 or is_modal(seq[0]) != is_modal(seq[1]):
                sub = self.axiom()
            n = self.random.randint(1, self.max_qubits)
            return QRule(n, self.gate(n), sub)
        sub = self.proof(depth - 1)
        seq = conclusion(sub)
        k = self.random.randrange(len(seq))
        if self.random.random() < 0.5:
            return Cut(k, 0, sub, self.identity_proof(seq[k]))
        return Cut(1, k, self.identity_proof(dual(seq[k])), sub)

    def circuit(self, max_qubits: int = 3, max_gates: int = 4) -> Circuit:
        m = self.random.randint(1, max_qubits)
        gates = []
        for _ in range(self.random.randint(0, max_gates)):
            k = self.random.randint(1, min(m, 2))
            targets = tuple(sorted(self.random.sample(range(1, m + 1), k)))
            gates.append(CircuitGate(self.gate(k), targets))
        return Circuit(m, gates)

    def one(self, circuit_ratio: float = 0.2) -> Optional[Proof]:
        """一个候选证明；超出规则预算时返回None"""
        if self.random.random() < circuit_ratio:
            p = encode(self.circuit())
        else:
            p = self.proof(self.random.randint(1, 4))
        if rule_count(p) > self.max_rules or not check(p).ok or register_size(p) > self.max_register:
            return None
        return p

    def corpus(self, count: int, circuit_ratio: float = 0.2) -> List[Proof]:
        proofs: List[Proof] = []
        attempts = 0
        while len(proofs) < count:
            attempts += 1
            p = self.one(circuit_ratio)
            if p is not None:
                proofs.append(p)
        logger.debug("生成 %d 个证明，尝试 %d 次", count, attempts)
        return proofs


__all__ = ["ProofGenerator", "random_unitary"]
