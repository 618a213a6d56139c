import logging
from typing import Optional

from utils.errors import QmllError
from utils.matrix import parse_state
from utils.proof import Proof
from utils.proof_text import parse_proof
from utils.qiam import RunResult, SemanticsResult, resolve_context, run_register, semantics_relative

logger = logging.getLogger(__name__)


class MachineService:
    """在QIAM上运行证明，或符号地计算相对某个负上下文的语义"""

    def _prepare(self, text: str, entry: Optional[int], context: str):
        p: Proof = parse_proof(text)
        position, c = resolve_context(p, context, None if entry is None else entry - 1)
        return p, position, c

    def run(self, text: str, entry: Optional[int] = None, context: str = "auto",
            register: Optional[str] = None, trace: bool = False) -> RunResult:
        """entry从1开始；register为寄存器文本，缺省为 |0…0⟩"""
        try:
            p, position, c = self._prepare(text, entry, context)
            state = None if register is None else parse_state(register)
            result = run_register(p, position, c, state, record_trace=trace)
        except QmllError as e:
            logger.error("运行机器时出错: %s", e)
            raise
        logger.info("机器在 %d 步后到达 %s", result.steps, result.final.occurrence)
        return result

    def semantics(self, text: str, entry: Optional[int] = None, context: str = "auto") -> SemanticsResult:
        try:
            p, position, c = self._prepare(text, entry, context)
            return semantics_relative(p, position, c)
        except QmllError as e:
            logger.error("计算语义时出错: %s", e)
            raise
