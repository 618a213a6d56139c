import logging
from typing import Optional

import numpy as np

from config.config import DEFAULT_SEED, DEFAULT_STRATEGY
from utils.cut_elim import ReductionTrace, normalize
from utils.errors import QmllError
from utils.proof import CheckReport, Proof, check, mll_axiom_link_matrix
from utils.proof_text import parse_proof

logger = logging.getLogger(__name__)


class ProofService:
    """证明的检查、规范化与公理连接矩阵"""

    def load(self, text: str, validate: bool = True) -> Proof:
        try:
            return parse_proof(text, validate=validate)
        except QmllError as e:
            logger.error("读取证明时出错: %s", e)
            raise

    def check(self, text: str) -> CheckReport:
        """只有语法错误抛出异常，规则违例写在报告里"""
        p = self.load(text, validate=False)
        report = check(p)
        logger.info("检查结果: %s", report)
        return report

    def normalize(self, text: str, strategy: Optional[str] = None, seed: Optional[int] = None) -> ReductionTrace:
        p = self.load(text)
        strategy = strategy or DEFAULT_STRATEGY
        seed = DEFAULT_SEED if seed is None else seed
        try:
            trace = normalize(p, strategy, seed)
        except QmllError as e:
            logger.error("规范化时出错: %s", e)
            raise
        return trace

    def mll_matrix(self, text: str) -> np.ndarray:
        p = self.load(text)
        try:
            return mll_axiom_link_matrix(p)
        except QmllError as e:
            logger.error("计算公理连接矩阵时出错: %s", e)
            raise
