import logging
from typing import Optional

from utils.circuit import Circuit, encode, extract, parse_circuit
from utils.errors import QmllError
from utils.proof import Proof
from utils.proof_text import parse_proof
from utils.qiam import resolve_context

logger = logging.getLogger(__name__)


class CircuitService:
    def encode(self, text: str) -> Proof:
        """电路JSON编码为证明"""
        try:
            c = parse_circuit(text)
            p = encode(c)
        except QmllError as e:
            logger.error("编码电路时出错: %s", e)
            raise
        logger.info("编码了 %d 个量子比特上的 %d 个门", c.n_qubits, len(c.gates))
        return p

    def extract(self, text: str, entry: Optional[int] = None, context: str = "auto",
                prune_identity: bool = False) -> Circuit:
        """从证明抽取电路"""
        try:
            p = parse_proof(text)
            position, c = resolve_context(p, context, None if entry is None else entry - 1)
            return extract(p, position, c, prune_identity)
        except QmllError as e:
            logger.error("抽取电路时出错: %s", e)
            raise
