"""QMLL工具链的异常层次

命令行根据异常类型映射退出码：语法错误为2，领域错误为1。
"""
from typing import Optional


class QmllError(Exception):
    """所有QMLL错误的基类"""
    exit_code = 1


class QmllSyntaxError(QmllError):
    """公式、证明、门、状态或上下文文本格式错误"""
    exit_code = 2

    def __init__(self, message: str, position: Optional[int] = None):
        self.message = message
        self.position = position
        if position is None:
            super().__init__(message)
        else:
            super().__init__(f"{message} (位置 {position})")


class ProofCheckError(QmllError):
    """证明未通过良构性检查"""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class PreconditionError(QmllError):
    """操作的前置条件不满足"""


class DimensionError(QmllError):
    """矩阵维度不匹配、非酉矩阵或偏移越界"""


class StaleRedexError(QmllError):
    """约简点与当前证明不再匹配"""


class BoundExceededError(QmllError):
    """规范化或机器运行超过步数上界（说明实现有缺陷）"""


class CircuitFormatError(QmllError):
    """电路JSON不符合数据模型"""
    exit_code = 2
